#include "qtraj/statespace.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <stdexcept>

namespace qtraj {

std::string to_string(Cavity c) { return c == Cavity::A ? "A" : "B"; }

// ------------------------------- SpaceLayout --------------------------------

SpaceLayout::SpaceLayout(int atoms_per_cavity, int photon_cutoff)
    : atoms_(atoms_per_cavity), n_max_(photon_cutoff), atoms_dim_(1) {
    if (atoms_per_cavity < 1) {
        throw std::invalid_argument("SpaceLayout: atoms_per_cavity must be >= 1");
    }
    if (photon_cutoff < 0) {
        throw std::invalid_argument("SpaceLayout: photon_cutoff must be >= 0");
    }
    for (int k = 0; k < atoms_; ++k) atoms_dim_ *= kLevelsPerAtom;
}

void SpaceLayout::check_site(const Site& s) const {
    if (s.kind == Site::Kind::atom && (s.atom < 0 || s.atom >= atoms_)) {
        throw std::invalid_argument("SpaceLayout: unknown atom site " + std::to_string(s.atom) +
                                    " in cavity " + to_string(s.cavity));
    }
}

Index SpaceLayout::site_dim(const Site& s) const {
    check_site(s);
    return s.kind == Site::Kind::atom ? kLevelsPerAtom : mode_dim();
}

Index SpaceLayout::cavity_index(const CavityLabel& label) const {
    if (static_cast<int>(label.levels.size()) != atoms_) {
        throw std::invalid_argument("cavity_index: wrong number of atom levels");
    }
    Index idx = 0;
    for (int level : label.levels) {
        if (level < 0 || level >= kLevelsPerAtom) {
            throw std::invalid_argument("cavity_index: atom level out of range");
        }
        idx = idx * kLevelsPerAtom + level;
    }
    if (label.photons < 0 || label.photons > n_max_) {
        throw std::invalid_argument("cavity_index: photon number out of range");
    }
    return idx * mode_dim() + label.photons;
}

CavityLabel SpaceLayout::cavity_label(Index i) const {
    if (i < 0 || i >= cavity_dim()) throw std::out_of_range("cavity_label: index out of range");
    CavityLabel label;
    label.photons = static_cast<int>(i % mode_dim());
    Index rest = i / mode_dim();
    label.levels.assign(static_cast<std::size_t>(atoms_), 0);
    for (int k = atoms_ - 1; k >= 0; --k) {
        label.levels[static_cast<std::size_t>(k)] = static_cast<int>(rest % kLevelsPerAtom);
        rest /= kLevelsPerAtom;
    }
    return label;
}

Index SpaceLayout::joint_index(const JointLabel& label) const {
    return cavity_index(label.a) * cavity_dim() + cavity_index(label.b);
}

JointLabel SpaceLayout::joint_label(Index i) const {
    if (i < 0 || i >= joint_dim()) throw std::out_of_range("joint_label: index out of range");
    return {cavity_label(i / cavity_dim()), cavity_label(i % cavity_dim())};
}

// ------------------------------- DenseOperator ------------------------------

namespace {

Index scope_dim(const SpaceLayout& layout, DenseOperator::Scope scope) {
    return scope == DenseOperator::Scope::joint ? layout.joint_dim() : layout.cavity_dim();
}

double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

}  // namespace

DenseOperator::DenseOperator(SpaceLayout layout, Scope scope, Matrix entries)
    : layout_(layout), scope_(scope), m_(std::move(entries)) {
    const Index d = scope_dim(layout_, scope_);
    if (m_.rows() != d || m_.cols() != d) {
        throw std::invalid_argument("DenseOperator: matrix is " + std::to_string(m_.rows()) + "x" +
                                    std::to_string(m_.cols()) + ", layout scope needs " +
                                    std::to_string(d));
    }
}

DenseOperator DenseOperator::identity(const SpaceLayout& layout, Scope scope) {
    const Index d = scope_dim(layout, scope);
    return {layout, scope, Matrix::Identity(d, d)};
}

DenseOperator DenseOperator::zero(const SpaceLayout& layout, Scope scope) {
    const Index d = scope_dim(layout, scope);
    return {layout, scope, Matrix::Zero(d, d)};
}

DenseOperator DenseOperator::adjoint() const { return {layout_, scope_, m_.adjoint()}; }

DenseOperator DenseOperator::hermitian_part() const {
    return {layout_, scope_, (m_ + m_.adjoint()) * 0.5};
}

DenseOperator DenseOperator::anti_hermitian_part() const {
    return {layout_, scope_, (m_ - m_.adjoint()) * 0.5};
}

bool DenseOperator::is_hermitian(double rel_tol) const {
    return max_abs(m_ - m_.adjoint()) <= rel_tol * max_abs(m_);
}

bool DenseOperator::is_anti_hermitian(double rel_tol) const {
    return max_abs(m_ + m_.adjoint()) <= rel_tol * max_abs(m_);
}

void DenseOperator::check_compatible(const DenseOperator& o) const {
    if (!(layout_ == o.layout_) || scope_ != o.scope_) {
        throw std::invalid_argument("DenseOperator: layout or scope mismatch");
    }
}

DenseOperator DenseOperator::operator+(const DenseOperator& o) const {
    check_compatible(o);
    return {layout_, scope_, m_ + o.m_};
}

DenseOperator DenseOperator::operator-(const DenseOperator& o) const {
    check_compatible(o);
    return {layout_, scope_, m_ - o.m_};
}

DenseOperator DenseOperator::operator*(const DenseOperator& o) const {
    check_compatible(o);
    return {layout_, scope_, m_ * o.m_};
}

DenseOperator DenseOperator::operator*(Complex s) const { return {layout_, scope_, m_ * s}; }

// --------------------------------- LocalSum ---------------------------------

LocalSum::LocalSum(SpaceLayout layout, Matrix on_a, Matrix on_b)
    : layout_(layout), a_(std::move(on_a)), b_(std::move(on_b)) {
    const Index d = layout_.cavity_dim();
    if (a_.rows() != d || a_.cols() != d || b_.rows() != d || b_.cols() != d) {
        throw std::invalid_argument("LocalSum: cavity terms must be cavity_dim square");
    }
}

LocalSum::LocalSum(const DenseOperator& on_a, const DenseOperator& on_b)
    : LocalSum(on_a.layout(), on_a.matrix(), on_b.matrix()) {
    if (on_a.scope() != DenseOperator::Scope::cavity ||
        on_b.scope() != DenseOperator::Scope::cavity || !(on_a.layout() == on_b.layout())) {
        throw std::invalid_argument("LocalSum: terms must be cavity-scoped on one layout");
    }
}

LocalSum LocalSum::zero(const SpaceLayout& layout) {
    const Index d = layout.cavity_dim();
    return {layout, Matrix::Zero(d, d), Matrix::Zero(d, d)};
}

DenseOperator LocalSum::to_joint() const {
    const Index d = layout_.cavity_dim();
    const Matrix id = Matrix::Identity(d, d);
    return {layout_, DenseOperator::Scope::joint, kron(a_, id) + kron(id, b_)};
}

LocalSum LocalSum::operator+(const LocalSum& o) const {
    if (!(layout_ == o.layout_)) throw std::invalid_argument("LocalSum: layout mismatch");
    return {layout_, a_ + o.a_, b_ + o.b_};
}

LocalSum LocalSum::operator*(Complex s) const { return {layout_, a_ * s, b_ * s}; }

// -------------------------------- StateVector -------------------------------

using RowMajorMatrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

StateVector::StateVector(SpaceLayout layout, Vector amplitudes)
    : layout_(layout), amps_(std::move(amplitudes)) {
    if (amps_.size() != layout_.joint_dim()) {
        throw std::invalid_argument("StateVector: length " + std::to_string(amps_.size()) +
                                    " != joint dimension " + std::to_string(layout_.joint_dim()));
    }
}

StateVector StateVector::basis(const SpaceLayout& layout, const JointLabel& label) {
    Vector v = Vector::Zero(layout.joint_dim());
    v[layout.joint_index(label)] = 1.0;
    return {layout, std::move(v)};
}

StateVector StateVector::product(const SpaceLayout& layout, const Vector& a, const Vector& b) {
    if (a.size() != layout.cavity_dim() || b.size() != layout.cavity_dim()) {
        throw std::invalid_argument("StateVector::product: factor length != cavity_dim");
    }
    return from_matrix(layout, a * b.transpose());
}

StateVector StateVector::from_matrix(const SpaceLayout& layout, const Matrix& psi) {
    const Index d = layout.cavity_dim();
    if (psi.rows() != d || psi.cols() != d) {
        throw std::invalid_argument("StateVector::from_matrix: shape mismatch");
    }
    RowMajorMatrix rm = psi;
    return {layout, Eigen::Map<const Vector>(rm.data(), d * d)};
}

Matrix StateVector::as_matrix() const {
    const Index d = layout_.cavity_dim();
    return Eigen::Map<const RowMajorMatrix>(amps_.data(), d, d);
}

StateVector StateVector::operator+(const StateVector& o) const {
    if (!(layout_ == o.layout_)) throw std::invalid_argument("StateVector: layout mismatch");
    return {layout_, amps_ + o.amps_};
}

StateVector StateVector::operator*(Complex s) const { return {layout_, amps_ * s}; }

Complex inner(const StateVector& a, const StateVector& b) {
    if (!(a.layout() == b.layout())) throw std::invalid_argument("inner: layout mismatch");
    return a.amplitudes().dot(b.amplitudes());  // conjugate-linear in a
}

double norm(const StateVector& s) { return s.amplitudes().norm(); }

StateVector normalize(const StateVector& s) {
    const double n = norm(s);
    if (!(n > 1e-12)) throw std::domain_error("normalize: numerically null vector");
    return {s.layout(), s.amplitudes() / n};
}

StateVector apply(const DenseOperator& op, const StateVector& s) {
    if (op.scope() != DenseOperator::Scope::joint || !(op.layout() == s.layout())) {
        throw std::invalid_argument("apply: operator must be joint-scoped on the state's layout");
    }
    return {s.layout(), op.matrix() * s.amplitudes()};
}

StateVector apply(const LocalSum& op, const StateVector& s) {
    if (!(op.layout() == s.layout())) throw std::invalid_argument("apply: layout mismatch");
    const Matrix psi = s.as_matrix();
    return StateVector::from_matrix(s.layout(), op.on_a() * psi + psi * op.on_b().transpose());
}

// --------------------------- Operator construction ---------------------------

Matrix kron(const Matrix& left, const Matrix& right) {
    Matrix out(left.rows() * right.rows(), left.cols() * right.cols());
    for (Index i = 0; i < left.rows(); ++i) {
        for (Index j = 0; j < left.cols(); ++j) {
            out.block(i * right.rows(), j * right.cols(), right.rows(), right.cols()) =
                left(i, j) * right;
        }
    }
    return out;
}

Matrix flip(int i, int j) {
    if (i < 0 || i >= kLevelsPerAtom || j < 0 || j >= kLevelsPerAtom) {
        throw std::invalid_argument("flip: level out of range");
    }
    Matrix m = Matrix::Zero(kLevelsPerAtom, kLevelsPerAtom);
    m(i, j) = 1.0;
    return m;
}

Matrix annihilator(int photon_cutoff) {
    const Index d = photon_cutoff + 1;
    Matrix a = Matrix::Zero(d, d);
    for (Index n = 1; n < d; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
    return a;
}

DenseOperator embed(const Matrix& local_op, const Site& site, const SpaceLayout& layout) {
    const Index local = layout.site_dim(site);
    if (local_op.rows() != local || local_op.cols() != local) {
        throw std::invalid_argument("embed: local operator is " + std::to_string(local_op.rows()) +
                                    "x" + std::to_string(local_op.cols()) + ", site needs " +
                                    std::to_string(local));
    }
    Matrix m;
    if (site.kind == Site::Kind::mode) {
        m = kron(Matrix::Identity(layout.atoms_dim(), layout.atoms_dim()), local_op);
    } else {
        Index before = 1;
        for (int k = 0; k < site.atom; ++k) before *= kLevelsPerAtom;
        const Index after = layout.atoms_dim() / (before * kLevelsPerAtom) * layout.mode_dim();
        m = kron(kron(Matrix::Identity(before, before), local_op), Matrix::Identity(after, after));
    }
    return {layout, DenseOperator::Scope::cavity, std::move(m)};
}

DenseOperator lift(const DenseOperator& cavity_op, Cavity c) {
    if (cavity_op.scope() != DenseOperator::Scope::cavity) {
        throw std::invalid_argument("lift: operator is not cavity-scoped");
    }
    const Index d = cavity_op.layout().cavity_dim();
    const Matrix id = Matrix::Identity(d, d);
    Matrix m = c == Cavity::A ? kron(cavity_op.matrix(), id) : kron(id, cavity_op.matrix());
    return {cavity_op.layout(), DenseOperator::Scope::joint, std::move(m)};
}

DenseOperator lift(const Matrix& local_op, const Site& site, const SpaceLayout& layout) {
    return lift(embed(local_op, site, layout), site.cavity);
}

// -------------------------------- Propagators --------------------------------

Matrix expm_generator(const Matrix& generator, double duration) {
    if (generator.rows() != generator.cols()) {
        throw std::invalid_argument("propagator: generator must be square");
    }
    if (!(duration >= 0.0) || !std::isfinite(duration)) {
        throw std::invalid_argument("propagator: duration must be finite and >= 0");
    }
    if (!generator.allFinite()) throw std::invalid_argument("propagator: non-finite generator");
    if (duration == 0.0) return Matrix::Identity(generator.rows(), generator.cols());
    const Matrix exponent = generator * Complex(0.0, -duration);
    Matrix u = exponent.exp();
    if (!u.allFinite()) throw std::runtime_error("propagator: exponential overflowed");
    return u;
}

DenseOperator propagator(const DenseOperator& generator, double duration) {
    return {generator.layout(), generator.scope(), expm_generator(generator.matrix(), duration)};
}

DenseOperator PairPropagator::to_joint(const SpaceLayout& layout) const {
    return {layout, DenseOperator::Scope::joint, kron(on_a, on_b)};
}

PairPropagator propagator(const LocalSum& generator, double duration) {
    return {expm_generator(generator.on_a(), duration), expm_generator(generator.on_b(), duration)};
}

void apply_in_place(const PairPropagator& u, Matrix& psi, Matrix& scratch) {
    scratch.noalias() = u.on_a * psi;
    psi.noalias() = scratch * u.on_b.transpose();
}

}  // namespace qtraj
