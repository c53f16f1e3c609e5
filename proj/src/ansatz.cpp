#include "fattn/ansatz.hpp"

#include <algorithm>
#include <array>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "fattn/errors.hpp"

namespace fattn {

std::string to_string(PlanKind k) {
    switch (k) {
        case PlanKind::ttn: return "ttn";
        case PlanKind::attn: return "attn";
        case PlanKind::fattn_l1: return "fattn-l1";
        case PlanKind::fattn_l2: return "fattn-l2";
        case PlanKind::fattn_l1l2: return "fattn-l1l2";
    }
    return "ttn";
}

PlanKind parse_plan_kind(const std::string& s) {
    for (auto k : {PlanKind::ttn, PlanKind::attn, PlanKind::fattn_l1, PlanKind::fattn_l2, PlanKind::fattn_l1l2})
        if (to_string(k) == s) return k;
    throw ConfigError("unknown ansatz kind '" + s + "'");
}

int PlacementPlan::max_layer() const {
    int m = 0;
    for (const auto& e : entries) m = std::max(m, e.layer);
    return m;
}

std::vector<int> PlacementPlan::entries_in_layer(int layer) const {
    std::vector<int> out;
    for (std::size_t i = 0; i < entries.size(); ++i)
        if (entries[i].layer == layer) out.push_back(static_cast<int>(i));
    return out;
}

namespace {

// Reference pattern for the 8x8 unit cell as (x_a, y_a, x_b, y_b); coordinate 8
// denotes the first column or row of the next cell. Every
// entry straddles one of the block boundaries that the tree handles worst:
// 14 cross the horizontal halves, 10 the vertical halves, 8 the shifted band.
std::vector<std::array<int, 4>> unit_cell_8x8() {
    std::vector<std::array<int, 4>> t;
    for (int y = 1; y <= 6; ++y) t.push_back({3, y, 4, y});
    for (int y : {1, 2, 5, 6}) t.push_back({7, y, 8, y});
    for (int x : {1, 2, 5, 6})
        for (auto [ya, yb] : {std::pair{1, 2}, {3, 4}, {5, 6}, {7, 8}}) t.push_back({x, ya, x, yb});
    for (int x : {3, 4}) t.push_back({x, 7, x, 8});
    for (int x : {0, 7})
        for (auto [ya, yb] : {std::pair{3, 4}, {7, 8}}) t.push_back({x, ya, x, yb});
    return t;
}

// Offset pairing (2i+1, 2i+2) on the coarse lattice below `layer`: along the
// merge axis of `layer` when its extent is at least 4, else along the other
// axis, else the plain pairs (2i, 2i+1) along the merge axis.
std::vector<PlanEntry> offset_pairs(const TreeLayout& tree, int layer) {
    const auto [cx, cy] = tree.extents.at(layer - 1);
    const Axis merge = tree.axis.at(layer - 1);
    Axis ax = merge;
    int offset = 1;
    const int ext_merge = merge == Axis::x ? cx : cy;
    const int ext_other = merge == Axis::x ? cy : cx;
    if (ext_merge < 4) {
        if (ext_other >= 4) ax = merge == Axis::x ? Axis::y : Axis::x;
        else offset = 0;
    }
    std::vector<PlanEntry> out;
    const int ext = ax == Axis::x ? cx : cy;
    if (ext < 2) return out;
    auto node = [&](int X, int Y) { return ((Y % cy + cy) % cy) * cx + ((X % cx + cx) % cx); };
    for (int Y = 0; Y < (ax == Axis::x ? cy : 1); ++Y)
        for (int X = 0; X < (ax == Axis::y ? cx : 1); ++X)
            for (int i = 0; 2 * i + 1 < ext; ++i) {
                const int s = 2 * i + offset, t = 2 * i + 1 + offset;
                if (ax == Axis::x) out.push_back({layer, node(s, Y), node(t, Y)});
                else out.push_back({layer, node(X, s), node(X, t)});
            }
    return out;
}

bool entries_adjacent(const TreeLayout& tree, const PlanEntry& e, const PlanEntry& f) {
    for (int u : {e.a, e.b})
        for (int v : {f.a, f.b})
            if (u == v || coarse_neighbors(tree, e.layer, u, v)) return true;
    return false;
}

}  // namespace

bool coarse_neighbors(const TreeLayout& tree, int layer, int a, int b) {
    const auto [cx, cy] = tree.extents.at(layer - 1);
    const int xa = a % cx, ya = a / cx, xb = b % cx, yb = b / cx;
    const int dx = ((xb - xa) % cx + cx) % cx, dy = ((yb - ya) % cy + cy) % cy;
    const bool nx = dy == 0 && cx > 1 && (dx == 1 || dx == cx - 1);
    const bool ny = dx == 0 && cy > 1 && (dy == 1 || dy == cy - 1);
    return nx || ny;
}

PlacementPlan ttn_plan() { return PlacementPlan{PlanKind::ttn, {}}; }

PlacementPlan fattn_plan_l1(const Lattice& lat) {
    PlacementPlan p{PlanKind::fattn_l1, {}};
    if (lat.lx % 8 == 0 && lat.ly % 8 == 0) {
        const auto cell = unit_cell_8x8();
        for (int ty = 0; ty < lat.ly / 8; ++ty)
            for (int tx = 0; tx < lat.lx / 8; ++tx)
                for (const auto& c : cell)
                    p.entries.push_back({1, lat.site(8 * tx + c[0], 8 * ty + c[1]), lat.site(8 * tx + c[2], 8 * ty + c[3])});
        return p;
    }
    p.entries = offset_pairs(build_tree(lat), 1);
    return p;
}

PlacementPlan attn_plan(const Lattice& lat) {
    const TreeLayout tree = build_tree(lat);
    PlacementPlan full = fattn_plan_l1(lat);
    PlacementPlan p{PlanKind::attn, {}};
    for (const auto& e : full.entries) {
        bool free = true;
        for (const auto& f : p.entries)
            if (entries_adjacent(tree, e, f)) {
                free = false;
                break;
            }
        if (free) p.entries.push_back(e);
    }
    return p;
}

PlacementPlan fattn_plan_l2(const Lattice& lat) {
    const TreeLayout tree = build_tree(lat);
    if (tree.num_layers() < 3) throw InvalidPlanError("second-layer disentanglers need at least three tree layers");
    return PlacementPlan{PlanKind::fattn_l2, offset_pairs(tree, 2)};
}

PlacementPlan combined_plan(const PlacementPlan& p1, const PlacementPlan& p2) {
    std::set<int> l1, l2;
    for (const auto& e : p1.entries) l1.insert(e.layer);
    for (const auto& e : p2.entries) l2.insert(e.layer);
    for (int l : l1)
        if (l2.count(l)) throw InvalidPlanError("combined plans must occupy distinct layers");
    PlacementPlan out{PlanKind::fattn_l1l2, p1.entries};
    if (p2.entries.empty()) out.kind = p1.kind;
    if (p1.entries.empty()) out.kind = p2.kind;
    out.entries.insert(out.entries.end(), p2.entries.begin(), p2.entries.end());
    std::stable_sort(out.entries.begin(), out.entries.end(),
                     [](const PlanEntry& x, const PlanEntry& y) { return x.layer < y.layer; });
    return out;
}

PlacementPlan make_plan(const Lattice& lat, PlanKind kind) {
    switch (kind) {
        case PlanKind::ttn: return ttn_plan();
        case PlanKind::attn: return attn_plan(lat);
        case PlanKind::fattn_l1: return fattn_plan_l1(lat);
        case PlanKind::fattn_l2: return fattn_plan_l2(lat);
        case PlanKind::fattn_l1l2: {
            PlacementPlan p = combined_plan(fattn_plan_l1(lat), fattn_plan_l2(lat));
            p.kind = PlanKind::fattn_l1l2;
            return p;
        }
    }
    return ttn_plan();
}

PlanReport validate_plan(const PlacementPlan& plan, const Lattice& lat, PlanKind kind) {
    const TreeLayout tree = build_tree(lat);
    PlanReport r;
    auto fail = [&](const PlanEntry& e, const PlanEntry& f, std::string why) {
        r.ok = false;
        r.violations.push_back({e, f, std::move(why)});
    };
    for (const auto& e : plan.entries) {
        if (e.layer < 1 || e.layer > tree.top()) {
            fail(e, e, "layer out of range");
            continue;
        }
        const int n = tree.nodes_in_layer(e.layer - 1);
        if (e.a < 0 || e.b < 0 || e.a >= n || e.b >= n || e.a == e.b) {
            fail(e, e, "node index out of range");
            continue;
        }
        if (!coarse_neighbors(tree, e.layer, e.a, e.b)) fail(e, e, "entry does not pair nearest neighbours");
    }
    if (!r.ok) return r;
    for (std::size_t i = 0; i < plan.entries.size(); ++i)
        for (std::size_t j = i + 1; j < plan.entries.size(); ++j) {
            const auto& e = plan.entries[i];
            const auto& f = plan.entries[j];
            if (e.layer != f.layer) continue;
            if (e.a == f.a || e.a == f.b || e.b == f.a || e.b == f.b) fail(e, f, "entries share a node");
            else if (kind == PlanKind::attn && entries_adjacent(tree, e, f))
                fail(e, f, "entries connected by a Hamiltonian bond");
        }
    return r;
}

std::string plan_to_text(const PlacementPlan& plan) {
    std::ostringstream os;
    os << "# kind " << to_string(plan.kind) << "\n";
    for (const auto& e : plan.entries) os << e.layer << ' ' << e.a << ' ' << e.b << '\n';
    return os.str();
}

PlacementPlan plan_from_text(const std::string& text) {
    PlacementPlan p;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream ls(line.substr(1));
            std::string key, value;
            if (ls >> key >> value && key == "kind") p.kind = parse_plan_kind(value);
            continue;
        }
        std::istringstream ls(line);
        PlanEntry e;
        if (!(ls >> e.layer >> e.a >> e.b)) throw ConfigError("malformed plan line: " + line);
        p.entries.push_back(e);
    }
    return p;
}

std::vector<int> bond_schedule(const TreeLayout& tree, int d, int D) {
    if (D < 1) throw ArgumentError("bond dimension must be >= 1");
    std::vector<int> dims(static_cast<std::size_t>(tree.top() + 1));
    dims[0] = d;
    double full = d;
    for (int l = 1; l <= tree.top(); ++l) {
        full = full * full;
        dims[l] = full >= D ? D : static_cast<int>(full);
    }
    dims[tree.top()] = 1;
    return dims;
}

DenseTensor AnsatzState::isometry_tensor(int layer, int index) const {
    const auto& w = isometry(layer, index);
    const auto dl = static_cast<std::size_t>(bond_dims[layer - 1]);
    return DenseTensor::from_matrix(w).reshape({dl, dl, static_cast<std::size_t>(w.cols())});
}

DenseTensor AnsatzState::disentangler_tensor(int entry) const {
    const auto& u = disentanglers.at(entry);
    const auto dl = static_cast<std::size_t>(bond_dims[plan.entries[entry].layer - 1]);
    return DenseTensor::from_matrix(u).reshape({dl, dl, dl, dl});
}

double AnsatzState::max_isometry_residual() const {
    double m = 0;
    for (const auto& layer : isometries)
        for (const auto& w : layer) m = std::max(m, isometry_residual(w));
    return m;
}

double AnsatzState::max_unitary_residual() const {
    double m = 0;
    for (const auto& u : disentanglers) m = std::max(m, isometry_residual(u));
    return m;
}

namespace {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (a * 1315423911ULL + b + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Embed the (dl_old x dr_old) x cols_old block of `w` into a larger isometry,
// completing the new columns with seeded random vectors orthogonal to the rest.
Eigen::MatrixXd pad_isometry(const Eigen::MatrixXd& w, int dl_old, int dl, int dp, std::uint64_t seed) {
    const int cols_old = static_cast<int>(w.cols());
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(dl * dl, dp);
    for (int a = 0; a < dl_old; ++a)
        for (int b = 0; b < dl_old; ++b) out.row(a * dl + b).head(cols_old) = w.row(a * dl_old + b);
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> dist;
    for (int c = cols_old; c < dp; ++c) {
        Eigen::VectorXd v(dl * dl);
        double nrm = 0;
        while (nrm < 1e-8) {
            for (auto& x : v) x = dist(gen);
            for (int pass = 0; pass < 2; ++pass) v -= out.leftCols(c) * (out.leftCols(c).transpose() * v);
            nrm = v.norm();
        }
        out.col(c) = v / nrm;
    }
    return out;
}

Eigen::MatrixXd pad_unitary(const Eigen::MatrixXd& u, int dl_old, int dl) {
    if (dl_old == dl) return u;
    Eigen::MatrixXd out = Eigen::MatrixXd::Identity(dl * dl, dl * dl);
    std::vector<int> idx;
    for (int a = 0; a < dl_old; ++a)
        for (int b = 0; b < dl_old; ++b) idx.push_back(a * dl + b);
    for (std::size_t i = 0; i < idx.size(); ++i)
        for (std::size_t j = 0; j < idx.size(); ++j) {
            out(idx[i], idx[j]) = u(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        }
    return out;
}

}  // namespace

AnsatzState init_state(const Lattice& lat, const PlacementPlan& plan, int D, std::uint64_t seed,
                       const AnsatzState* warm) {
    if (D < 1) throw ArgumentError("bond dimension must be >= 1");
    AnsatzState s;
    s.lattice = lat;
    s.tree = build_tree(lat);
    s.plan = plan;
    s.D = D;
    s.bond_dims = bond_schedule(s.tree, lat.d, D);
    const PlanReport rep = validate_plan(plan, lat, plan.kind == PlanKind::attn ? PlanKind::attn : PlanKind::fattn_l1);
    if (!rep.ok) throw InvalidPlanError("invalid placement plan: " + rep.violations.front().reason);
    if (warm) {
        if (warm->lattice.lx != lat.lx || warm->lattice.ly != lat.ly || warm->lattice.d != lat.d)
            throw ShapeError("warm state belongs to a different lattice");
        for (int l = 0; l <= s.tree.top(); ++l)
            if (warm->bond_dims[l] > s.bond_dims[l]) throw ShapeError("warm state has larger bond dimensions");
    }
    s.isometries.resize(static_cast<std::size_t>(s.tree.top()));
    for (int l = 1; l <= s.tree.top(); ++l) {
        const int dl = s.bond_dims[l - 1], dp = s.bond_dims[l];
        for (int i = 0; i < s.tree.nodes_in_layer(l); ++i) {
            const std::uint64_t node_seed = mix_seed(seed, static_cast<std::uint64_t>(l), static_cast<std::uint64_t>(i));
            if (warm) {
                s.isometries[l - 1].push_back(
                    pad_isometry(warm->isometry(l, i), warm->bond_dims[l - 1], dl, dp, node_seed));
            } else {
                s.isometries[l - 1].push_back(random_isometry_matrix(dl * dl, dp, node_seed));
            }
        }
    }
    for (const auto& e : plan.entries) {
        const int dl = s.bond_dims[e.layer - 1];
        Eigen::MatrixXd u = Eigen::MatrixXd::Identity(dl * dl, dl * dl);
        if (warm) {
            for (std::size_t j = 0; j < warm->plan.entries.size(); ++j)
                if (warm->plan.entries[j] == e) {
                    u = pad_unitary(warm->disentanglers[j], warm->bond_dims[e.layer - 1], dl);
                    break;
                }
        }
        s.disentanglers.push_back(u);
    }
    return s;
}

void save_state(const std::string& dir, const AnsatzState& s) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    {
        std::ofstream meta(fs::path(dir) / "state.txt");
        meta << "lx " << s.lattice.lx << "\nly " << s.lattice.ly << "\nd " << s.lattice.d << "\nD " << s.D << '\n';
    }
    {
        std::ofstream plan(fs::path(dir) / "plan.txt");
        plan << plan_to_text(s.plan);
    }
    for (int l = 1; l <= s.tree.top(); ++l)
        for (int i = 0; i < s.tree.nodes_in_layer(l); ++i)
            save_tensor((fs::path(dir) / ("w_" + std::to_string(l) + "_" + std::to_string(i) + ".bin")).string(),
                        DenseTensor::from_matrix(s.isometry(l, i)));
    for (std::size_t e = 0; e < s.disentanglers.size(); ++e)
        save_tensor((fs::path(dir) / ("u_" + std::to_string(e) + ".bin")).string(),
                    DenseTensor::from_matrix(s.disentanglers[e]));
}

AnsatzState load_state(const std::string& dir) {
    namespace fs = std::filesystem;
    std::ifstream meta(fs::path(dir) / "state.txt");
    if (!meta) throw ConfigError("missing checkpoint metadata in " + dir);
    std::map<std::string, int> kv;
    std::string k;
    int v;
    while (meta >> k >> v) kv[k] = v;
    std::ifstream pf(fs::path(dir) / "plan.txt");
    std::stringstream buf;
    buf << pf.rdbuf();
    const Lattice lat = build_lattice(kv.at("lx"), kv.at("ly"), kv.at("d"));
    AnsatzState s = init_state(lat, plan_from_text(buf.str()), kv.at("D"), 0);
    for (int l = 1; l <= s.tree.top(); ++l)
        for (int i = 0; i < s.tree.nodes_in_layer(l); ++i) {
            Eigen::MatrixXd w =
                load_tensor((fs::path(dir) / ("w_" + std::to_string(l) + "_" + std::to_string(i) + ".bin")).string())
                    .to_matrix();
            if (w.rows() != s.isometry(l, i).rows() || w.cols() != s.isometry(l, i).cols())
                throw ShapeError("checkpoint isometry has the wrong shape");
            s.isometry(l, i) = w;
        }
    for (std::size_t e = 0; e < s.disentanglers.size(); ++e) {
        Eigen::MatrixXd u = load_tensor((fs::path(dir) / ("u_" + std::to_string(e) + ".bin")).string()).to_matrix();
        if (u.rows() != s.disentanglers[e].rows()) throw ShapeError("checkpoint disentangler has the wrong shape");
        s.disentanglers[e] = u;
    }
    return s;
}

}  // namespace fattn
