// statespace.hpp: two-cavity tensor-product layout, dense operators, pure
// states and exact propagators for piecewise-constant generators.
//
// Basis order (bit-exact): inside a cavity the atoms in ascending site order
// are the most significant digits (base 3) and the photon number is the least
// significant digit (base n_max+1). In the joint space cavity A is more
// significant than cavity B, so joint = idx_A * cavity_dim + idx_B.

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <string>
#include <vector>

namespace qtraj {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using Index = Eigen::Index;

inline constexpr int kLevelsPerAtom = 3;

enum class Cavity { A = 0, B = 1 };

std::string to_string(Cavity c);

// An atom or a cavity mode, addressed by cavity and (for atoms) site index.
struct Site {
    enum class Kind { atom, mode };
    Kind kind = Kind::mode;
    Cavity cavity = Cavity::A;
    int atom = 0;

    static Site atom_at(Cavity c, int k) { return {Kind::atom, c, k}; }
    static Site mode_of(Cavity c) { return {Kind::mode, c, 0}; }
};

struct CavityLabel {
    std::vector<int> levels;  // one entry per atom, each in {0,1,2}
    int photons = 0;

    bool operator==(const CavityLabel&) const = default;
};

struct JointLabel {
    CavityLabel a;
    CavityLabel b;

    bool operator==(const JointLabel&) const = default;
};

class SpaceLayout {
public:
    explicit SpaceLayout(int atoms_per_cavity = 1, int photon_cutoff = 1);

    int atoms_per_cavity() const { return atoms_; }
    int photon_cutoff() const { return n_max_; }
    Index mode_dim() const { return n_max_ + 1; }
    Index atoms_dim() const { return atoms_dim_; }
    Index cavity_dim() const { return atoms_dim_ * mode_dim(); }
    Index joint_dim() const { return cavity_dim() * cavity_dim(); }

    // Local dimension of a single site: 3 for an atom, n_max+1 for a mode.
    Index site_dim(const Site& s) const;

    Index cavity_index(const CavityLabel& label) const;
    CavityLabel cavity_label(Index i) const;
    Index joint_index(const JointLabel& label) const;
    JointLabel joint_label(Index i) const;

    bool operator==(const SpaceLayout&) const = default;

private:
    void check_site(const Site& s) const;

    int atoms_;
    int n_max_;
    Index atoms_dim_;
};

// Square complex matrix over either the joint basis or one cavity's basis.
class DenseOperator {
public:
    enum class Scope { joint, cavity };

    DenseOperator(SpaceLayout layout, Scope scope, Matrix entries);

    static DenseOperator identity(const SpaceLayout& layout, Scope scope);
    static DenseOperator zero(const SpaceLayout& layout, Scope scope);

    const SpaceLayout& layout() const { return layout_; }
    Scope scope() const { return scope_; }
    const Matrix& matrix() const { return m_; }
    Index dim() const { return m_.rows(); }

    DenseOperator adjoint() const;
    // (M + M†)/2 and (M - M†)/2.
    DenseOperator hermitian_part() const;
    DenseOperator anti_hermitian_part() const;

    // max|M - M†| <= rel_tol * ||M|| (max-norm); zero counts as Hermitian.
    bool is_hermitian(double rel_tol = 1e-12) const;
    bool is_anti_hermitian(double rel_tol = 1e-12) const;

    DenseOperator operator+(const DenseOperator& o) const;
    DenseOperator operator-(const DenseOperator& o) const;
    DenseOperator operator*(const DenseOperator& o) const;
    DenseOperator operator*(Complex s) const;

private:
    void check_compatible(const DenseOperator& o) const;

    SpaceLayout layout_;
    Scope scope_;
    Matrix m_;
};

// Operator of the form X_A (x) 1 + 1 (x) X_B. Hamiltonians and jump operators
// of the two-cavity setup never couple the cavities beyond such sums, which
// lets propagation factorize per cavity.
class LocalSum {
public:
    LocalSum(SpaceLayout layout, Matrix on_a, Matrix on_b);
    LocalSum(const DenseOperator& on_a, const DenseOperator& on_b);

    static LocalSum zero(const SpaceLayout& layout);

    const SpaceLayout& layout() const { return layout_; }
    const Matrix& on_a() const { return a_; }
    const Matrix& on_b() const { return b_; }
    const Matrix& on(Cavity c) const { return c == Cavity::A ? a_ : b_; }

    DenseOperator to_joint() const;

    LocalSum operator+(const LocalSum& o) const;
    LocalSum operator*(Complex s) const;

private:
    SpaceLayout layout_;
    Matrix a_;
    Matrix b_;
};

class StateVector {
public:
    StateVector(SpaceLayout layout, Vector amplitudes);

    static StateVector basis(const SpaceLayout& layout, const JointLabel& label);
    // |a> (x) |b> from per-cavity vectors.
    static StateVector product(const SpaceLayout& layout, const Vector& a, const Vector& b);
    // Inverse of as_matrix(): rows index cavity A, columns cavity B.
    static StateVector from_matrix(const SpaceLayout& layout, const Matrix& psi);

    const SpaceLayout& layout() const { return layout_; }
    const Vector& amplitudes() const { return amps_; }
    Complex operator[](Index i) const { return amps_[i]; }
    Complex amplitude(const JointLabel& label) const { return amps_[layout_.joint_index(label)]; }

    // Amplitudes reshaped as cavity_dim x cavity_dim, psi(iA, iB).
    Matrix as_matrix() const;

    StateVector operator+(const StateVector& o) const;
    StateVector operator*(Complex s) const;

private:
    SpaceLayout layout_;
    Vector amps_;
};

Complex inner(const StateVector& a, const StateVector& b);
double norm(const StateVector& s);
StateVector normalize(const StateVector& s);

StateVector apply(const DenseOperator& op, const StateVector& s);
StateVector apply(const LocalSum& op, const StateVector& s);

// Kronecker product, left factor most significant.
Matrix kron(const Matrix& left, const Matrix& right);

// Single-site building blocks: |i><j| on an atom, annihilator on a mode.
Matrix flip(int i, int j);
Matrix annihilator(int photon_cutoff);

// Embed a site-local matrix into the site's cavity (scope cavity) or into
// the joint space (scope joint), identity elsewhere.
DenseOperator embed(const Matrix& local_op, const Site& site, const SpaceLayout& layout);
DenseOperator lift(const Matrix& local_op, const Site& site, const SpaceLayout& layout);
// Cavity-scoped operator to joint space.
DenseOperator lift(const DenseOperator& cavity_op, Cavity c);

// exp(-i H t) for piecewise-constant, possibly non-Hermitian H.
Matrix expm_generator(const Matrix& generator, double duration);
DenseOperator propagator(const DenseOperator& generator, double duration);

struct PairPropagator {
    Matrix on_a;
    Matrix on_b;

    DenseOperator to_joint(const SpaceLayout& layout) const;
};

// exp(-i (H_A + H_B) t) = exp(-i H_A t) (x) exp(-i H_B t).
PairPropagator propagator(const LocalSum& generator, double duration);

// psi <- U_A psi U_B^T on the matrix view of a joint state; scratch is
// resized as needed so hot loops avoid reallocation.
void apply_in_place(const PairPropagator& u, Matrix& psi, Matrix& scratch);

}  // namespace qtraj
