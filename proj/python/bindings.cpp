#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fattn/bench.hpp"
#include "fattn/entropy.hpp"
#include "fattn/errors.hpp"
#include "fattn/optimizer.hpp"
#include "fattn/oracle.hpp"

namespace py = pybind11;
using namespace fattn;

namespace {

py::dict row_to_dict(const BenchRow& r) {
    py::dict d;
    d["kind"] = to_string(r.kind);
    d["D"] = r.D;
    d["energy_per_site"] = r.energy_per_site;
    d["reference_per_site"] = r.reference_per_site;
    d["reference_source"] = r.reference_source;
    d["relative_error"] = r.relative_error;
    d["sweeps"] = r.sweeps;
    d["seconds_per_sweep"] = r.seconds_per_sweep;
    d["converged"] = r.converged;
    d["failed"] = r.failed;
    d["message"] = r.message;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Tree tensor network ground states of the 2D transverse-field Ising model";

    py::register_exception<Error>(m, "FattnError", PyExc_RuntimeError);

    m.def("ed_energy_per_site",
          [](int lx, int ly, double lambda) { return ed_ground_energy(build_lattice(lx, ly), lambda).energy_per_site; },
          py::arg("lx"), py::arg("ly"), py::arg("lam"), "Exact ground energy per site (up to 20 sites).");

    m.def("polar_update", [](const Eigen::MatrixXd& env) { return polar_update(env); }, py::arg("env"),
          "Isometry minimizing trace(env @ w).");

    m.def("isometry_residual", [](const Eigen::MatrixXd& w) { return isometry_residual(w); }, py::arg("w"));

    m.def("bond_schedule",
          [](int lx, int ly, int D) {
              const Lattice lat = build_lattice(lx, ly);
              return bond_schedule(build_tree(lat), lat.d, D);
          },
          py::arg("lx"), py::arg("ly"), py::arg("D"));

    m.def("optimize",
          [](int lx, int ly, double lambda, const std::string& ansatz, int D, int max_sweeps, double tol,
             std::uint64_t seed) {
              const Lattice lat = build_lattice(lx, ly);
              AnsatzState s = init_state(lat, make_plan(lat, parse_plan_kind(ansatz)), D, seed);
              Optimizer opt(s, tfim_hamiltonian(lat, lambda));
              OptimizeOptions o;
              o.max_sweeps = max_sweeps;
              o.tol = tol;
              const EnergyTrace tr = opt.optimize(o);
              std::vector<double> energies;
              for (const auto& r : tr.records) energies.push_back(r.energy_per_site);
              py::dict d;
              d["energy_per_site"] = tr.final_energy / lat.num_sites();
              d["converged"] = tr.converged;
              d["trace"] = energies;
              d["max_isometry_residual"] = s.max_isometry_residual();
              d["max_unitary_residual"] = s.max_unitary_residual();
              return d;
          },
          py::arg("lx"), py::arg("ly"), py::arg("lam"), py::arg("ansatz") = "ttn", py::arg("D") = 4,
          py::arg("max_sweeps") = 200, py::arg("tol") = 1e-9, py::arg("seed") = 1);

    m.def("run_grid",
          [](const std::string& config_text, bool write) {
              const RunConfig cfg = parse_config(config_text);
              GridResult res = run_grid(cfg, write);
              apply_reference(res, cfg);
              py::list rows;
              for (const auto& p : res.points) rows.append(row_to_dict(p.row));
              return rows;
          },
          py::arg("config_text"), py::arg("write") = false,
          "Runs the bond-dimension grid for a flat `key = value` configuration and returns one dict per point.");

    m.def("required_D",
          [](int L, int n, int m_, int d, double k) {
              CutBudget b;
              b.L = L;
              b.n = n;
              b.m = m_;
              b.d = d;
              b.p = L > 0 ? static_cast<double>(n) / L : 0.0;
              b.c = m_ > 0 ? static_cast<double>(L) / m_ : 0.0;
              return required_D(b, k);
          },
          py::arg("L"), py::arg("n"), py::arg("m"), py::arg("d"), py::arg("k"));

    m.def("named_cut_budgets",
          [](int lx, int ly, const std::string& ansatz, int D) {
              const Lattice lat = build_lattice(lx, ly);
              const TreeLayout tree = build_tree(lat);
              const PlacementPlan plan = make_plan(lat, parse_plan_kind(ansatz));
              py::list out;
              for (const auto& c : named_cuts(lat)) {
                  const CutBudget b = budget(lat, c, plan, tree, D);
                  py::dict d;
                  d["name"] = c.name;
                  d["L"] = b.L;
                  d["n"] = b.n;
                  d["m"] = b.m;
                  d["entropy_bound"] = b.entropy_bound();
                  out.append(d);
              }
              return out;
          },
          py::arg("lx"), py::arg("ly"), py::arg("ansatz"), py::arg("D"));
}
