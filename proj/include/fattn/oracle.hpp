#pragma once

#include <cstdint>
#include <optional>

#include <Eigen/Dense>

#include "fattn/model.hpp"

namespace fattn {

struct EdResult {
    double energy = 0.0;           // total
    double energy_per_site = 0.0;
    std::optional<Eigen::VectorXd> ground_vector;
    int iterations = 0;            // matrix-vector products (0 on the dense path)
    double residual = 0.0;         // |Hv - Ev| / |v|
};

enum class EdMethod { automatic, iterative, dense };

inline constexpr int kEdMaxSites = 20;
inline constexpr int kEdDenseMaxSites = 12;

// Ground state of a Hamiltonian with d = 2 via restarted Lanczos (matrix-free)
// or a dense eigen-solve. The start vector is seeded for determinism.
EdResult ed_ground_state(const Hamiltonian& h, bool want_vector, EdMethod method = EdMethod::automatic,
                         std::uint64_t seed = 12345, int max_matvecs = 10000);

EdResult ed_ground_energy(const Lattice& lat, double lambda, bool want_vector = false,
                          EdMethod method = EdMethod::automatic);

// H|psi> with the bit-level kernel used by the iterative path.
Eigen::VectorXd ed_apply(const Hamiltonian& h, const Eigen::VectorXd& psi);

}  // namespace fattn
