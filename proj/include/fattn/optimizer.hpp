#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fattn/ansatz.hpp"
#include "fattn/effective.hpp"
#include "fattn/engine.hpp"
#include "fattn/model.hpp"

namespace fattn {

// Linearized environment of one tensor T: E = Tr(y * T) + outside_energy for
// the unshifted energy, with y of shape (cols(T), rows(T)). With the shift
// applied, y additionally carries -(sum of term shifts) * Tr(rho T^T T) so that
// the minimizer of Tr(y * T) never raises the energy.
struct Environment {
    Eigen::MatrixXd y;
    double outside_energy = 0.0;   // only filled when requested
    double shift = 0.0;            // total shift folded into y
    std::vector<int> terms;        // physical terms contributing
};

struct SweepRecord {
    int sweep = 0;
    double energy = 0.0;
    double energy_per_site = 0.0;
    double relative_change = 0.0;
    double seconds = 0.0;
    double max_isometry_residual = 0.0;
    double max_unitary_residual = 0.0;
    bool monotone = true;
    bool shifted = false;          // sweep ran with shifted environments
};

struct EnergyTrace {
    std::vector<SweepRecord> records;
    bool converged = false;
    double initial_energy = 0.0;
    double final_energy = 0.0;
    int warnings = 0;
    int fallbacks = 0;             // sweeps redone with shifted environments

    std::string to_csv() const;
};

struct OptimizeOptions {
    int max_sweeps = 200;
    double tol = 1e-9;              // stop when |dE / E| < tol
    double monotone_slack = 1e-9;   // relative increase tolerated before a warning
    // Plain environments converge fastest. The per-term shift guarantees descent
    // and is used on demand: a plain sweep that raises the energy is undone and
    // repeated with shifted environments when shifted_fallback is set.
    bool shifted = false;
    bool shifted_fallback = true;
    bool throw_on_stall = false;    // ConvergenceError when max_sweeps is hit
    std::function<void(const SweepRecord&)> on_sweep;
    std::function<void(const std::string&)> log;  // warnings; stderr when empty
};

/**
 * Alternating optimizer for a given state and Hamiltonian. The state is owned
 * by the caller and modified in place.
 *
 * A sweep first updates every disentangler (lowest layer first), then every
 * isometry layer by layer from the bottom, then the top tensor. Isometries and
 * disentanglers receive the polar-decomposition update of their shifted
 * environment; the top tensor is replaced by the lowest eigenvector of its
 * effective Hamiltonian.
 */
class Optimizer {
public:
    Optimizer(AnsatzState& state, const Hamiltonian& h);

    AnsatzState& state() { return s_; }
    const std::vector<EffectiveTerm>& physical() const { return phys_; }

    double energy();

    Environment isometry_environment(int layer, int index, bool shifted, bool with_outside = false);
    Environment disentangler_environment(int entry, bool shifted, bool with_outside = false);

    void update_isometry(int layer, int index);
    void update_disentangler(int entry);
    void update_top();

    // Whether single updates use the shifted environments (default true).
    void set_shifted(bool shifted) { shifted_ = shifted; }

    double sweep();
    EnergyTrace optimize(const OptimizeOptions& opt);

private:
    Environment probe_environment(KetOverride::Kind kind, int layer, int index, bool shifted, bool with_outside);
    Environment pair_environment(int entry, bool shifted, bool with_outside);
    void ensure_engine();
    void ensure_prelift();
    void check_health(const Eigen::MatrixXd& t, const std::string& what) const;

    AnsatzState& s_;
    Hamiltonian h_;
    std::vector<EffectiveTerm> phys_;
    std::unique_ptr<TreeEngine> engine_;
    bool engine_dirty_ = true;
    std::vector<EffectiveTerm> prelift_;
    bool prelift_dirty_ = true;
    bool shifted_ = true;
};

// Energy of a state through the causal-cone engine.
double energy(const AnsatzState& s, const Hamiltonian& h);

// Minimizer of Tr(y * T) over isometries T.
Eigen::MatrixXd update_tensor(const Eigen::MatrixXd& y);

// d/de E(T expm(e A)) at e = 0 for antisymmetric A, from the unshifted environment.
double tangent_derivative(const Eigen::MatrixXd& y, const Eigen::MatrixXd& t, const Eigen::MatrixXd& a);

enum class FitVariable { inverse_d, d };
FitVariable parse_fit_variable(const std::string& s);
std::string to_string(FitVariable v);

struct Extrapolation {
    double energy = 0.0;                 // extrapolated total energy
    std::vector<double> coefficients;    // c0 + c1 x + c2 x^2
    double rms_residual = 0.0;
    FitVariable variable = FitVariable::inverse_d;
};

// Quadratic least-squares fit of E against 1/D (limit 1/D -> 0) or against D
// (limit at the stationary point of a convex fit, else at the largest D).
Extrapolation extrapolate_energy(const std::vector<int>& dims, const std::vector<double>& energies,
                                 FitVariable variable = FitVariable::inverse_d);

}  // namespace fattn
