#include "fattn/lattice.hpp"

#include <algorithm>
#include <array>
#include <functional>
#include <limits>
#include <sstream>

#include "fattn/errors.hpp"

namespace fattn {

bool is_power_of_two(int v) { return v > 0 && (v & (v - 1)) == 0; }

int Lattice::site(int x, int y) const {
    x = ((x % lx) + lx) % lx;
    y = ((y % ly) + ly) % ly;
    return y * lx + x;
}

Lattice build_lattice(int lx, int ly, int d) {
    if (lx < 2 || ly < 2 || !is_power_of_two(lx) || !is_power_of_two(ly))
        throw UnsupportedGeometryError("lattice extents must be powers of two >= 2");
    if (d < 2) throw UnsupportedGeometryError("physical dimension must be >= 2");
    return Lattice{lx, ly, d};
}

std::vector<Bond> bonds(const Lattice& lat) {
    std::vector<Bond> out;
    auto add = [&](int a, int b, Axis ax, int mult) {
        out.push_back(Bond{std::min(a, b), std::max(a, b), ax, mult});
    };
    for (int y = 0; y < lat.ly; ++y)
        for (int x = 0; x < lat.lx; ++x) {
            if (lat.lx == 2) {
                if (x == 0) add(lat.site(0, y), lat.site(1, y), Axis::x, 2);
            } else {
                add(lat.site(x, y), lat.site(x + 1, y), Axis::x, 1);
            }
        }
    for (int y = 0; y < lat.ly; ++y)
        for (int x = 0; x < lat.lx; ++x) {
            if (lat.ly == 2) {
                if (y == 0) add(lat.site(x, 0), lat.site(x, 1), Axis::y, 2);
            } else {
                add(lat.site(x, y), lat.site(x, y + 1), Axis::y, 1);
            }
        }
    return out;
}

// Layer l merges along x when l is odd and along y when even, falling back to
// the other axis once an axis is fully coarse-grained.
TreeLayout build_tree(const Lattice& lat) {
    TreeLayout t;
    t.lx = lat.lx;
    t.ly = lat.ly;
    int cx = lat.lx, cy = lat.ly;
    t.extents.emplace_back(cx, cy);
    for (int layer = 1; cx * cy > 1; ++layer) {
        Axis ax = (layer % 2 == 1) ? Axis::x : Axis::y;
        if (ax == Axis::x && cx == 1) ax = Axis::y;
        if (ax == Axis::y && cy == 1) ax = Axis::x;
        const int ncx = ax == Axis::x ? cx / 2 : cx;
        const int ncy = ax == Axis::y ? cy / 2 : cy;
        std::vector<MergeNode> nodes;
        nodes.reserve(static_cast<std::size_t>(ncx * ncy));
        for (int Y = 0; Y < ncy; ++Y)
            for (int X = 0; X < ncx; ++X) {
                MergeNode n;
                n.layer = layer;
                n.index = Y * ncx + X;
                n.x = X;
                n.y = Y;
                if (ax == Axis::x) {
                    n.left = Y * cx + 2 * X;
                    n.right = Y * cx + 2 * X + 1;
                } else {
                    n.left = (2 * Y) * cx + X;
                    n.right = (2 * Y + 1) * cx + X;
                }
                nodes.push_back(n);
            }
        if (!t.layers.empty())
            for (const auto& n : nodes) {
                t.layers.back()[n.left].parent = n.index;
                t.layers.back()[n.right].parent = n.index;
            }
        else {
            t.site_parent.assign(static_cast<std::size_t>(lat.num_sites()), -1);
            for (const auto& n : nodes) {
                t.site_parent[n.left] = n.index;
                t.site_parent[n.right] = n.index;
            }
        }
        t.layers.push_back(std::move(nodes));
        t.axis.push_back(ax);
        cx = ncx;
        cy = ncy;
        t.extents.emplace_back(cx, cy);
    }

    t.site_label.assign(static_cast<std::size_t>(lat.num_sites()), -1);
    int next = 0;
    std::function<void(int, int)> visit = [&](int layer, int idx) {
        if (layer == 0) {
            t.site_label[idx] = next++;
            return;
        }
        const auto& n = t.node(layer, idx);
        visit(layer - 1, n.left);
        visit(layer - 1, n.right);
    };
    visit(t.top(), 0);
    t.label_site.assign(t.site_label.size(), -1);
    for (std::size_t s = 0; s < t.site_label.size(); ++s) t.label_site[t.site_label[s]] = static_cast<int>(s);
    return t;
}

int TreeLayout::nodes_in_layer(int layer) const {
    if (layer == 0) return lx * ly;
    return static_cast<int>(layers.at(layer - 1).size());
}

int TreeLayout::parent_of(int layer, int index) const {
    if (layer == 0) return site_parent.at(index);
    return node(layer, index).parent;
}

std::pair<int, int> TreeLayout::children(int layer, int index) const {
    const auto& n = node(layer, index);
    return {n.left, n.right};
}

int TreeLayout::ancestor(int layer, int index, int up) const {
    while (layer < up) {
        index = parent_of(layer, index);
        ++layer;
    }
    return index;
}

std::pair<int, int> TreeLayout::label_range(int layer, int index) const {
    int lo = index, hi = index;
    for (int l = layer; l > 0; --l) {
        lo = node(l, lo).left;
        hi = node(l, hi).right;
    }
    return {site_label[lo], site_label[hi] + 1};
}

std::vector<int> TreeLayout::subtree_sites(int layer, int index) const {
    auto [lo, hi] = label_range(layer, index);
    std::vector<int> out(label_site.begin() + lo, label_site.begin() + hi);
    std::sort(out.begin(), out.end());
    return out;
}

int boundary_length(const Lattice& lat, const std::vector<int>& part_a) {
    std::vector<char> in(static_cast<std::size_t>(lat.num_sites()), 0);
    for (int s : part_a) in.at(s) = 1;
    int n = 0;
    for (const auto& b : bonds(lat))
        if (in[b.i] != in[b.j]) n += b.multiplicity;
    return n;
}

Cut make_cut(const Lattice& lat, std::vector<int> part_a, std::string name) {
    std::sort(part_a.begin(), part_a.end());
    part_a.erase(std::unique(part_a.begin(), part_a.end()), part_a.end());
    if (part_a.empty() || static_cast<int>(part_a.size()) >= lat.num_sites())
        throw ArgumentError("cut must be a proper nonempty subset");
    Cut c;
    c.boundary_length = boundary_length(lat, part_a);
    c.part_a = std::move(part_a);
    c.name = std::move(name);
    return c;
}

namespace {

std::vector<int> rect(const Lattice& lat, int x0, int y0, int w, int h) {
    std::vector<int> s;
    for (int j = 0; j < h; ++j)
        for (int i = 0; i < w; ++i) s.push_back(lat.site(x0 + i, y0 + j));
    return s;
}

}  // namespace

std::vector<Cut> named_cuts(const Lattice& lat) {
    std::vector<Cut> out;
    if (lat.lx == 8 && lat.ly == 8) {
        out.push_back(make_cut(lat, rect(lat, 0, 0, 8, 4), "green"));
        out.push_back(make_cut(lat, rect(lat, 0, 0, 4, 8), "blue"));
        out.push_back(make_cut(lat, rect(lat, 0, 2, 8, 4), "red"));
        // Rectangles with boundary lengths 20 and 16 whose tree crossings are
        // 4 and 2 respectively.
        out.push_back(make_cut(lat, rect(lat, 0, 2, 6, 4), "corner"));
        out.push_back(make_cut(lat, rect(lat, 0, 2, 6, 2), "band"));
        return out;
    }
    // Generic block-boundary family: the top-level half along y, the half along
    // x, and the y band shifted by a quarter of the extent.
    if (lat.ly >= 2) out.push_back(make_cut(lat, rect(lat, 0, 0, lat.lx, lat.ly / 2), "other"));
    if (lat.lx >= 2) out.push_back(make_cut(lat, rect(lat, 0, 0, lat.lx / 2, lat.ly), "other"));
    if (lat.ly >= 4) out.push_back(make_cut(lat, rect(lat, 0, lat.ly / 4, lat.lx, lat.ly / 2), "other"));
    return out;
}

int tree_bonds_crossed(const Cut& cut, const TreeLayout& tree) {
    const int n = tree.lx * tree.ly;
    std::vector<char> in(static_cast<std::size_t>(n), 0);
    for (int s : cut.part_a) in.at(s) = 1;
    constexpr int inf = std::numeric_limits<int>::max() / 4;
    // cost[v][side]: fewest cut edges inside the subtree of v when v sits on `side`.
    std::vector<std::array<int, 2>> cost(static_cast<std::size_t>(n));
    for (int s = 0; s < n; ++s) cost[s] = in[s] ? std::array<int, 2>{inf, 0} : std::array<int, 2>{0, inf};
    for (int layer = 1; layer <= tree.top(); ++layer) {
        std::vector<std::array<int, 2>> next(tree.layers[layer - 1].size());
        for (const auto& node : tree.layers[layer - 1])
            for (int side = 0; side < 2; ++side) {
                int total = 0;
                for (int c : {node.left, node.right})
                    total += std::min(cost[c][side], cost[c][1 - side] + 1);
                next[node.index][side] = std::min(total, inf);
            }
        cost = std::move(next);
    }
    return std::min(cost[0][0], cost[0][1]);
}

std::string tree_to_text(const TreeLayout& tree) {
    std::ostringstream os;
    os << "# layer index left right parent x y\n";
    for (const auto& layer : tree.layers)
        for (const auto& n : layer)
            os << n.layer << ' ' << n.index << ' ' << n.left << ' ' << n.right << ' ' << n.parent << ' '
               << n.x << ' ' << n.y << '\n';
    os << "# site label\n";
    for (std::size_t s = 0; s < tree.site_label.size(); ++s) os << "site " << s << ' ' << tree.site_label[s] << '\n';
    return os.str();
}

std::string cut_to_text(const Lattice& lat, const Cut& cut) {
    std::ostringstream os;
    os << "# cut " << cut.name << " boundary_length " << cut.boundary_length << '\n';
    std::vector<char> in(static_cast<std::size_t>(lat.num_sites()), 0);
    for (int s : cut.part_a) in[s] = 1;
    for (int y = 0; y < lat.ly; ++y) {
        for (int x = 0; x < lat.lx; ++x) os << (in[lat.site(x, y)] ? 'A' : '.');
        os << '\n';
    }
    return os.str();
}

}  // namespace fattn
