#pragma once

#include <string>
#include <utility>
#include <vector>

namespace fattn {

enum class Axis { x, y };

// Periodic square lattice, sites numbered row-major: s = y * lx + x.
struct Lattice {
    int lx = 0;
    int ly = 0;
    int d = 2;

    int num_sites() const { return lx * ly; }
    int site(int x, int y) const;  // coordinates are wrapped
    int x_of(int s) const { return s % lx; }
    int y_of(int s) const { return s / lx; }
};

struct Bond {
    int i = 0;  // i < j
    int j = 0;
    Axis axis = Axis::x;
    int multiplicity = 1;  // 2 for the merged wrap bond on an extent-2 axis
};

struct MergeNode {
    int layer = 0;   // merge layer, 1 = first coarse-graining step
    int index = 0;   // position within its layer (row-major over the coarse lattice)
    int left = 0;    // child index in layer - 1 (a site when layer == 1)
    int right = 0;
    int parent = -1; // index in layer + 1, -1 for the root
    int x = 0;       // coarse coordinates
    int y = 0;
};

struct TreeLayout {
    int lx = 0;
    int ly = 0;
    std::vector<std::vector<MergeNode>> layers;  // layers[k] holds merge layer k + 1
    std::vector<Axis> axis;                      // merge axis of each merge layer
    std::vector<std::pair<int, int>> extents;    // coarse lattice extents for layer 0..top
    std::vector<int> site_parent;                // layer-1 parent of each site
    std::vector<int> site_label;                 // block-recursive 1D label of each site
    std::vector<int> label_site;

    int num_layers() const { return static_cast<int>(layers.size()); }
    int top() const { return num_layers(); }
    int nodes_in_layer(int layer) const;  // layer 0 counts sites
    const MergeNode& node(int layer, int index) const { return layers.at(layer - 1).at(index); }
    int parent_of(int layer, int index) const;
    std::pair<int, int> children(int layer, int index) const;
    // Half-open interval of 1D labels covered by the subtree of (layer, index).
    std::pair<int, int> label_range(int layer, int index) const;
    // Ancestor of (layer, index) at layer `up` (up >= layer).
    int ancestor(int layer, int index, int up) const;
    // Sites covered by a node's subtree.
    std::vector<int> subtree_sites(int layer, int index) const;
};

struct Cut {
    std::vector<int> part_a;  // sorted site list
    std::string name;         // green, blue, red, corner, band or a custom label
    int boundary_length = 0;
};

Lattice build_lattice(int lx, int ly, int d = 2);
std::vector<Bond> bonds(const Lattice& lat);
TreeLayout build_tree(const Lattice& lat);

int boundary_length(const Lattice& lat, const std::vector<int>& part_a);
Cut make_cut(const Lattice& lat, std::vector<int> part_a, std::string name);
std::vector<Cut> named_cuts(const Lattice& lat);

// Minimum number of tree edges (site legs included) separating part_a from the rest.
int tree_bonds_crossed(const Cut& cut, const TreeLayout& tree);

std::string tree_to_text(const TreeLayout& tree);
std::string cut_to_text(const Lattice& lat, const Cut& cut);

bool is_power_of_two(int v);

}  // namespace fattn
