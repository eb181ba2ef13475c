#include "qrect/cubes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include <json.hpp>

namespace qrect {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Farthest-point order with nearest-center snapshots taken whenever the net
// of a level is complete.
struct NetHierarchy {
    std::vector<Index> order;
    std::vector<std::size_t> net_size;        // per level
    std::vector<std::vector<Index>> nearest;  // per level, nearest center of each point
};

NetHierarchy farthest_point_nets(const WeightedPointCloud& cloud, int depth, Index start) {
    const Index n = cloud.size();
    const Index dim = cloud.points.rows();
    const double* base = cloud.points.data();
    const Metric d(cloud.metric);
    std::vector<double> mind(n, kInf);
    std::vector<Index> nearest(n, -1);
    NetHierarchy net;
    int next_level = 0;

    Index cand = start;
    double radius = kInf;
    for (;;) {
        while (next_level <= depth && radius < std::ldexp(1.0, -next_level - 2)) {
            net.net_size.push_back(net.order.size());
            net.nearest.push_back(nearest);
            ++next_level;
        }
        if (next_level > depth) break;
        net.order.push_back(cand);
        const double* c = base + cand * dim;
        for (Index i = 0; i < n; ++i) {
            const double v = d(c, base + i * dim);
            if (v < mind[i] || (v == mind[i] && cand < nearest[i])) {
                mind[i] = v;
                nearest[i] = cand;
            }
        }
        radius = -1.0;
        for (Index i = 0; i < n; ++i)
            if (mind[i] > radius) {
                radius = mind[i];
                cand = i;
            }
    }
    return net;
}

double c0_ball_term(const DyadicTree& tree, const Cube& q) {
    const auto& cloud = tree.cloud();
    const double* x = cloud.points.data() + q.center * cloud.points.rows();
    std::vector<Index> near;
    tree.grid(q.level).radius_query(x, q.side, near);
    double best = q.side;
    const Metric d(cloud.metric);
    for (Index i : near)
        if (tree.cube_of(q.level, i) != q.id)
            best = std::min(best, d(x, cloud.points.data() + i * cloud.points.rows()));
    return best / q.side;
}

double c0_diam_term(const Cube& q) { return q.diam > 0.0 ? q.side / q.diam : kInf; }

}  // namespace

DyadicTree DyadicTree::build(const WeightedPointCloud& input, int depth, std::uint64_t seed) {
    if (input.size() < 2) throw DegenerateDiameter("a cube system needs at least two points");
    if (depth < 1) throw InvalidParameter("depth", "must be >= 1");
    const double diam = diameter(input).value;
    if (!(diam > 0.0)) throw DegenerateDiameter("cloud has zero diameter");
    input.validate();

    const int shift = -static_cast<int>(std::floor(std::log2(diam)));
    double factor = std::ldexp(1.0, shift);
    while (diam * factor >= 2.0) factor /= 2.0;
    while (diam * factor < 1.0) factor *= 2.0;

    DyadicTree tree;
    tree.scale_ = factor;
    auto scaled = std::make_shared<WeightedPointCloud>(rescaled(input, factor));
    for (int j = 0; j <= depth; ++j)
        if (std::ldexp(1.0, -j) < 10.0 * scaled->h)
            throw ScaleBelowResolution("level " + std::to_string(j) + " has side " +
                                           std::to_string(std::ldexp(1.0, -j)) + " below 10h = " +
                                           std::to_string(10.0 * scaled->h),
                                       j);
    tree.cloud_ = scaled;
    const WeightedPointCloud& cloud = *scaled;
    const Index n = cloud.size();

    const NetHierarchy net = farthest_point_nets(cloud, depth, static_cast<Index>(seed % std::uint64_t(n)));

    // Level-j center of every point, following parents from the deepest net.
    std::vector<std::vector<Index>> center_of(depth + 1, std::vector<Index>(n));
    center_of[depth] = net.nearest[depth];
    for (int j = depth - 1; j >= 0; --j)
        for (Index i = 0; i < n; ++i) center_of[j][i] = net.nearest[j][center_of[j + 1][i]];

    std::vector<Cube> cubes;
    std::vector<std::vector<CubeId>> id_of_center(depth + 1, std::vector<CubeId>(n, kNoCube));
    for (int j = 0; j <= depth; ++j) {
        std::vector<Index> centers(net.order.begin(), net.order.begin() + static_cast<std::ptrdiff_t>(net.net_size[j]));
        std::sort(centers.begin(), centers.end());
        for (Index c : centers) {
            Cube q;
            q.id = static_cast<CubeId>(cubes.size());
            q.level = j;
            q.center = c;
            q.side = std::ldexp(1.0, -j);
            id_of_center[j][c] = q.id;
            cubes.push_back(std::move(q));
        }
    }
    for (int j = 0; j <= depth; ++j)
        for (Index i = 0; i < n; ++i) cubes[id_of_center[j][center_of[j][i]]].members.push_back(i);
    for (auto& q : cubes)
        if (q.level > 0) {
            q.parent = id_of_center[q.level - 1][net.nearest[q.level - 1][q.center]];
            cubes[q.parent].children.push_back(q.id);
        }
    for (auto it = cubes.rbegin(); it != cubes.rend(); ++it) {
        double m = 0.0;
        if (it->level == depth)
            for (Index i : it->members) m += cloud.weights(i);
        else
            for (CubeId c : it->children) m += cubes[c].mass;
        it->mass = m;
        const Diameter dq = diameter(cloud, it->members);
        it->diam = dq.value;
        it->diam_exact = dq.exact;
    }
    tree.cubes_ = std::move(cubes);
    tree.index_cubes();

    auto grids = std::make_shared<std::vector<SpatialGrid>>();
    for (int j = 0; j <= depth; ++j) grids->emplace_back(cloud, std::ldexp(1.0, -j - 1));
    tree.grids_ = grids;

    double c0 = kInf;
    for (const auto& q : tree.cubes_) c0 = std::min({c0, c0_diam_term(q), c0_ball_term(tree, q)});
    tree.measured_c0_ = c0;
    return tree;
}

void DyadicTree::index_cubes() {
    int depth = 0;
    for (const auto& q : cubes_) depth = std::max(depth, q.level);
    levels_.assign(depth + 1, {});
    point_cube_.assign(depth + 1, std::vector<CubeId>(cloud_->size(), kNoCube));
    for (const auto& q : cubes_) {
        levels_[q.level].push_back(q.id);
        for (Index i : q.members) point_cube_[q.level][i] = q.id;
    }
}

DyadicTree DyadicTree::with_cubes(std::vector<Cube> cubes) const {
    DyadicTree t = *this;
    t.cubes_ = std::move(cubes);
    t.index_cubes();
    return t;
}

std::span<const CubeId> DyadicTree::level(int j) const {
    if (j < 0 || j > depth()) throw DepthExceeded("level " + std::to_string(j) + " not built");
    return levels_[j];
}

const Cube& DyadicTree::cube(CubeId id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= cubes_.size())
        throw UnknownCube("unknown cube id " + std::to_string(id));
    return cubes_[id];
}

CubeId DyadicTree::cube_of(int j, Index point) const {
    if (j < 0 || j > depth()) throw DepthExceeded("level " + std::to_string(j) + " not built");
    return point_cube_[j].at(point);
}

const SpatialGrid& DyadicTree::grid(int j) const { return grids_->at(j); }

std::vector<Index> enlarge(const DyadicTree& tree, CubeId id, double K) {
    const Cube& q = tree.cube(id);
    if (!(K >= 1.0)) throw InvalidParameter("K", "must be >= 1");
    const double reach = (K - 1.0) * q.diam;
    if (!(reach > 0.0)) return q.members;
    const auto& cloud = tree.cloud();
    const Index dim = cloud.points.rows();
    const double* base = cloud.points.data();
    const Metric d(cloud.metric);
    const double* x = base + q.center * dim;
    double spread = 0.0;
    for (Index i : q.members) spread = std::max(spread, d(x, base + i * dim));

    std::vector<Index> cand;
    tree.grid(q.level).radius_query(x, spread + reach, cand);
    const SpatialGrid inside(cloud, q.members, std::max(reach, q.side / 8.0));
    std::vector<Index> out = q.members;
    for (Index i : cand)
        if (tree.cube_of(q.level, i) != id && inside.any_within(base + i * dim, reach)) out.push_back(i);
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<CubeId> descendants(const DyadicTree& tree, CubeId id, int j) {
    const Cube& q = tree.cube(id);
    if (j < 0) throw InvalidParameter("j", "must be >= 0");
    if (q.level + j > tree.depth())
        throw DepthExceeded("descendants below level " + std::to_string(tree.depth()) + " requested");
    std::vector<CubeId> cur{id};
    for (int step = 0; step < j; ++step) {
        std::vector<CubeId> next;
        for (CubeId c : cur)
            for (CubeId ch : tree.cube(c).children) next.push_back(ch);
        cur = std::move(next);
    }
    return cur;
}

double sum_of_parts(const DyadicTree& tree, CubeId id, int j) {
    const Cube& q = tree.cube(id);
    if (j == 0) return q.mass;
    double s = 0.0;
    for (CubeId c : q.children) s += sum_of_parts(tree, c, j - 1);
    return s;
}

std::vector<CubeId> patch_cover(const DyadicTree& tree, CubeId id) {
    const Cube& q = tree.cube(id);
    std::vector<CubeId> cover;
    for (Index i : enlarge(tree, id, 2.0)) cover.push_back(tree.cube_of(q.level, i));
    std::sort(cover.begin(), cover.end());
    cover.erase(std::unique(cover.begin(), cover.end()), cover.end());
    return cover;
}

CubePatch cube_patch(const DyadicTree& tree, CubeId id) {
    const Cube& q = tree.cube(id);
    const auto cover = patch_cover(tree, id);
    CubePatch p;
    p.m = static_cast<int>(cover.size());
    if (!(q.diam > 0.0)) return p;
    const auto& cloud = tree.cloud();
    const Index dim = cloud.points.rows();
    const SpatialGrid inside(cloud, q.members, q.side / 4.0);
    double worst = 0.0;
    for (CubeId c : cover) {
        if (c == id) continue;
        for (Index i : tree.cube(c).members)
            worst = std::max(worst, inside.nearest(cloud.points.data() + i * dim, [](Index) { return true; }));
    }
    p.K0 = 1.0 + worst / q.diam;
    return p;
}

AxiomReport verify_axioms(const DyadicTree& tree, bool with_patch) {
    AxiomReport r;
    const Index n = tree.cloud().size();
    const int depth = tree.depth();
    const auto cubes = tree.cubes();

    // Level membership derived from member lists only.
    std::vector<std::vector<CubeId>> owner(depth + 1, std::vector<CubeId>(n, kNoCube));
    r.partition_ok = true;
    for (int j = 0; j <= depth; ++j) {
        std::vector<int> count(n, 0);
        for (CubeId id : tree.level(j)) {
            const Cube& q = tree.cube(id);
            if (q.members.empty()) r.partition_ok = false;
            for (Index i : q.members) {
                ++count[i];
                owner[j][i] = id;
            }
        }
        for (Index i = 0; i < n; ++i)
            if (count[i] != 1) r.partition_ok = false;
    }

    r.nesting_ok = true;
    for (const auto& q : cubes) {
        if (q.level == 0) {
            if (q.parent != kNoCube) r.nesting_ok = false;
            continue;
        }
        if (q.parent == kNoCube || tree.cube(q.parent).level != q.level - 1) {
            r.nesting_ok = false;
            continue;
        }
        for (Index i : q.members)
            if (owner[q.level - 1][i] != q.parent) r.nesting_ok = false;
        const auto& sib = tree.cube(q.parent).children;
        if (std::find(sib.begin(), sib.end(), q.id) == sib.end()) r.nesting_ok = false;
    }

    r.unique_ancestor_ok = true;
    for (const auto& q : cubes) {
        CubeId anc = q.id;
        for (int j = q.level - 1; j >= 0; --j) {
            anc = tree.cube(anc).parent;
            if (anc == kNoCube) {
                r.unique_ancestor_ok = false;
                break;
            }
            for (Index i : q.members)
                if (owner[j][i] != anc) r.unique_ancestor_ok = false;
        }
    }

    r.sum_of_parts_ok = true;
    r.descendant_constant = 0.0;
    const double s = tree.cloud().s;
    for (const auto& q : cubes) {
        double leaf_sum = 0.0;
        if (q.level == depth) {
            for (Index i : q.members) leaf_sum += tree.cloud().weights(i);
            if (leaf_sum != q.mass) r.sum_of_parts_ok = false;
        }
        for (int j = 0; q.level + j <= depth; ++j) {
            if (sum_of_parts(tree, q.id, j) != q.mass) r.sum_of_parts_ok = false;
            const auto f = descendants(tree, q.id, j);
            double flat = 0.0;
            for (CubeId c : f) flat += tree.cube(c).mass;
            if (q.mass > 0.0)
                r.flat_sum_deviation = std::max(r.flat_sum_deviation, std::abs(flat - q.mass) / q.mass);
            r.descendant_constant = std::max(r.descendant_constant, f.size() / std::pow(2.0, s * j));
        }
    }

    r.diam_bound_c0 = kInf;
    r.center_ball_c0 = kInf;
    r.mass_lower = kInf;
    r.mass_upper = 0.0;
    for (const auto& q : cubes) {
        r.diam_bound_c0 = std::min(r.diam_bound_c0, c0_diam_term(q));
        r.center_ball_c0 = std::min(r.center_ball_c0, c0_ball_term(tree, q));
        const double ratio = q.mass / std::pow(q.side, s);
        r.mass_lower = std::min(r.mass_lower, ratio);
        r.mass_upper = std::max(r.mass_upper, ratio);
        r.diam_exact = r.diam_exact && q.diam_exact;
    }
    r.measured_c0 = std::min(r.diam_bound_c0, r.center_ball_c0);

    if (with_patch) {
        for (const auto& q : cubes) {
            const CubePatch p = cube_patch(tree, q.id);
            r.patch_m = std::max(r.patch_m, p.m);
            r.patch_K0 = std::max(r.patch_K0, p.K0);
        }
    }
    return r;
}

void write_tree_json(const DyadicTree& tree, std::ostream& out) {
    nlohmann::json j;
    j["measured_c0"] = tree.measured_c0();
    j["scale"] = tree.scale();
    nlohmann::json levels = nlohmann::json::array();
    for (int l = 0; l <= tree.depth(); ++l) {
        nlohmann::json cubes = nlohmann::json::array();
        for (CubeId id : tree.level(l)) {
            const Cube& q = tree.cube(id);
            cubes.push_back({{"id", q.id},
                             {"center", q.center},
                             {"parent", q.parent == kNoCube ? nlohmann::json(nullptr) : nlohmann::json(q.parent)},
                             {"members", q.members},
                             {"mass", q.mass}});
        }
        levels.push_back({{"j", l}, {"cubes", std::move(cubes)}});
    }
    j["levels"] = std::move(levels);
    out << j.dump() << '\n';
}

}  // namespace qrect
