// Compiled core: exact maximum-weight matching (blossom algorithm),
// shortest-path decoding on detector graphs, and a batched Monte Carlo
// shot engine.
//
// The matching algorithm is an O(n^3) stage-based blossom implementation
// with vertex and blossom dual variables.  It finds an exact maximum-weight
// matching in a general weighted graph.  Minimum-weight perfect matching is
// obtained through a uniform weight shift that makes maximum cardinality
// dominate the objective.

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <memory>
#include <queue>
#include <stdexcept>
#include <tuple>
#include <utility>
#include <vector>

#include <pybind11/pybind11.h>
#include <pybind11/numpy.h>
#include <pybind11/stl.h>

namespace py = pybind11;

namespace mwm {

using Edge = std::tuple<int, int, double>;

constexpr int LABEL_NONE = 0;
constexpr int LABEL_S = 1;
constexpr int LABEL_T = 2;

struct Blossom {
    Blossom* parent = nullptr;
    int base_vertex = -1;
    int label = LABEL_NONE;
    bool has_tree_edge = false;
    std::pair<int, int> tree_edge{-1, -1};
    int best_edge = -1;
    bool marker = false;

    bool nontrivial = false;
    // Fields below are only used when nontrivial.
    std::vector<Blossom*> subblossoms;
    std::vector<std::pair<int, int>> edges;
    double dual_var = 0.0;
    bool has_best_edge_set = false;
    std::vector<int> best_edge_set;

    void collect_vertices(std::vector<int>& out) const {
        if (!nontrivial) {
            out.push_back(base_vertex);
            return;
        }
        std::vector<const Blossom*> stack{this};
        while (!stack.empty()) {
            const Blossom* b = stack.back();
            stack.pop_back();
            for (const Blossom* sub : b->subblossoms) {
                if (sub->nontrivial)
                    stack.push_back(sub);
                else
                    out.push_back(sub->base_vertex);
            }
        }
    }
};

struct AlternatingPath {
    std::vector<std::pair<int, int>> edges;
};

class MatchingContext {
public:
    explicit MatchingContext(int num_vertex, const std::vector<Edge>& edges)
        : edges_(edges), num_vertex_(num_vertex) {
        adjacent_edges_.resize(num_vertex_);
        for (size_t e = 0; e < edges_.size(); ++e) {
            adjacent_edges_[std::get<0>(edges_[e])].push_back((int)e);
            adjacent_edges_[std::get<1>(edges_[e])].push_back((int)e);
        }
        vertex_mate_.assign(num_vertex_, -1);
        trivial_blossom_.resize(num_vertex_);
        for (int x = 0; x < num_vertex_; ++x) {
            pool_.emplace_back();
            trivial_blossom_[x] = &pool_.back();
            trivial_blossom_[x]->base_vertex = x;
        }
        vertex_top_blossom_ = trivial_blossom_;
        double max_weight = 0.0;
        for (const Edge& e : edges_)
            max_weight = std::max(max_weight, std::get<2>(e));
        vertex_dual_2x_.assign(num_vertex_, max_weight);
        vertex_best_edge_.assign(num_vertex_, -1);
    }

    void run() {
        if (edges_.empty())
            return;
        while (run_stage()) {
        }
    }

    std::vector<int> mates() const { return vertex_mate_; }

private:
    double edge_slack_2x(int e) const {
        const auto& [x, y, w] = edges_[e];
        return vertex_dual_2x_[x] + vertex_dual_2x_[y] - 2.0 * w;
    }

    void lset_reset() {
        std::fill(vertex_best_edge_.begin(), vertex_best_edge_.end(), -1);
        for (Blossom* b : trivial_blossom_)
            b->best_edge = -1;
        for (Blossom* b : nontrivial_blossom_) {
            b->best_edge = -1;
            b->has_best_edge_set = false;
            b->best_edge_set.clear();
        }
    }

    void lset_add_vertex_edge(int y, int e, double slack) {
        int best_edge = vertex_best_edge_[y];
        if (best_edge == -1) {
            vertex_best_edge_[y] = e;
        } else if (slack < edge_slack_2x(best_edge)) {
            vertex_best_edge_[y] = e;
        }
    }

    std::pair<int, double> lset_get_best_vertex_edge() const {
        int best_index = -1;
        double best_slack = 0.0;
        for (int x = 0; x < num_vertex_; ++x) {
            if (vertex_top_blossom_[x]->label == LABEL_NONE) {
                int e = vertex_best_edge_[x];
                if (e != -1) {
                    double slack = edge_slack_2x(e);
                    if (best_index == -1 || slack < best_slack) {
                        best_index = e;
                        best_slack = slack;
                    }
                }
            }
        }
        return {best_index, best_slack};
    }

    void lset_new_blossom(Blossom* blossom) {
        if (blossom->nontrivial) {
            blossom->has_best_edge_set = true;
            blossom->best_edge_set.clear();
        }
    }

    void lset_add_blossom_edge(Blossom* blossom, int e, double slack) {
        if (blossom->best_edge == -1) {
            blossom->best_edge = e;
        } else if (slack < edge_slack_2x(blossom->best_edge)) {
            blossom->best_edge = e;
        }
        if (blossom->nontrivial)
            blossom->best_edge_set.push_back(e);
    }

    void lset_merge_blossoms(Blossom* blossom) {
        std::vector<int> best_edge_to_blossom(num_vertex_, -1);
        std::vector<double> best_slack_to_blossom(num_vertex_, 0.0);
        int best_edge = -1;
        double best_slack = 0.0;

        for (Blossom* sub : blossom->subblossoms) {
            if (sub->label != LABEL_S)
                continue;
            const std::vector<int>* sub_edge_set;
            std::vector<int> moved;
            if (sub->nontrivial) {
                moved = std::move(sub->best_edge_set);
                sub->best_edge_set.clear();
                sub->has_best_edge_set = false;
                sub_edge_set = &moved;
            } else {
                sub_edge_set = &adjacent_edges_[sub->base_vertex];
            }
            for (int e : *sub_edge_set) {
                const auto& [x, y, w] = edges_[e];
                (void)w;
                Blossom* bx = vertex_top_blossom_[x];
                Blossom* by = vertex_top_blossom_[y];
                if (bx == by)
                    continue;
                Blossom* other = (bx == blossom) ? by : bx;
                if (other->label != LABEL_S)
                    continue;
                double slack = edge_slack_2x(e);
                int base = other->base_vertex;
                if (best_edge_to_blossom[base] == -1
                        || slack < best_slack_to_blossom[base]) {
                    best_edge_to_blossom[base] = e;
                    best_slack_to_blossom[base] = slack;
                }
                if (best_edge == -1 || slack < best_slack) {
                    best_edge = e;
                    best_slack = slack;
                }
            }
        }

        blossom->has_best_edge_set = true;
        blossom->best_edge_set.clear();
        for (int e : best_edge_to_blossom) {
            if (e != -1)
                blossom->best_edge_set.push_back(e);
        }
        blossom->best_edge = best_edge;
    }

    std::pair<int, double> lset_get_best_blossom_edge() const {
        int best_index = -1;
        double best_slack = 0.0;
        auto consider = [&](const Blossom* b) {
            if (b->label == LABEL_S && b->parent == nullptr && b->best_edge != -1) {
                double slack = edge_slack_2x(b->best_edge);
                if (best_index == -1 || slack < best_slack) {
                    best_index = b->best_edge;
                    best_slack = slack;
                }
            }
        };
        for (const Blossom* b : trivial_blossom_)
            consider(b);
        for (const Blossom* b : nontrivial_blossom_)
            consider(b);
        return {best_index, best_slack};
    }

    void reset_stage() {
        for (Blossom* b : trivial_blossom_) {
            b->label = LABEL_NONE;
            b->has_tree_edge = false;
        }
        for (Blossom* b : nontrivial_blossom_) {
            b->label = LABEL_NONE;
            b->has_tree_edge = false;
        }
        queue_.clear();
        lset_reset();
    }

    AlternatingPath trace_alternating_paths(int x, int y) {
        std::vector<Blossom*> marked_blossoms;
        std::vector<std::pair<int, int>> xedges{{x, y}};
        std::vector<std::pair<int, int>> yedges{{y, x}};
        Blossom* first_common = nullptr;

        while (x != -1 || y != -1) {
            Blossom* bx = vertex_top_blossom_[x];
            if (bx->marker) {
                first_common = bx;
                break;
            }
            bx->marker = true;
            marked_blossoms.push_back(bx);

            if (!bx->has_tree_edge) {
                x = -1;
            } else {
                xedges.push_back(bx->tree_edge);
                x = bx->tree_edge.first;
            }
            if (y != -1) {
                std::swap(x, y);
                std::swap(xedges, yedges);
            }
        }
        for (Blossom* b : marked_blossoms)
            b->marker = false;

        if (first_common != nullptr) {
            while (vertex_top_blossom_[yedges.back().first] != first_common)
                yedges.pop_back();
        }

        AlternatingPath path;
        path.edges.reserve(xedges.size() + yedges.size());
        for (auto it = xedges.rbegin(); it != xedges.rend(); ++it)
            path.edges.push_back(*it);
        for (size_t i = 1; i < yedges.size(); ++i)
            path.edges.emplace_back(yedges[i].second, yedges[i].first);
        return path;
    }

    void make_blossom(const AlternatingPath& path) {
        std::vector<Blossom*> subblossoms;
        subblossoms.reserve(path.edges.size());
        for (const auto& [x, y] : path.edges) {
            (void)y;
            subblossoms.push_back(vertex_top_blossom_[x]);
        }

        pool_.emplace_back();
        Blossom* blossom = &pool_.back();
        blossom->nontrivial = true;
        blossom->base_vertex = subblossoms[0]->base_vertex;
        blossom->subblossoms = subblossoms;
        blossom->edges = path.edges;
        nontrivial_blossom_.push_back(blossom);

        for (Blossom* sub : subblossoms)
            sub->parent = blossom;

        std::vector<int> verts;
        blossom->collect_vertices(verts);
        for (int x : verts)
            vertex_top_blossom_[x] = blossom;

        blossom->label = LABEL_S;
        blossom->has_tree_edge = subblossoms[0]->has_tree_edge;
        blossom->tree_edge = subblossoms[0]->tree_edge;

        for (Blossom* sub : subblossoms) {
            if (sub->label == LABEL_T) {
                std::vector<int> sv;
                sub->collect_vertices(sv);
                queue_.insert(queue_.end(), sv.begin(), sv.end());
            }
        }
        lset_merge_blossoms(blossom);
    }

    void find_path_through_blossom(
            Blossom* blossom, Blossom* sub,
            std::vector<Blossom*>& nodes,
            std::vector<std::pair<int, int>>& edges_out) {
        nodes.clear();
        edges_out.clear();
        nodes.push_back(sub);
        int nsub = (int)blossom->subblossoms.size();
        int p = 0;
        for (int i = 0; i < nsub; ++i) {
            if (blossom->subblossoms[i] == sub) {
                p = i;
                break;
            }
        }
        while (p != 0) {
            if (p % 2 == 0) {
                edges_out.emplace_back(blossom->edges[p - 1].second,
                                       blossom->edges[p - 1].first);
                nodes.push_back(blossom->subblossoms[p - 1]);
                edges_out.emplace_back(blossom->edges[p - 2].second,
                                       blossom->edges[p - 2].first);
                nodes.push_back(blossom->subblossoms[p - 2]);
                p -= 2;
            } else {
                edges_out.push_back(blossom->edges[p]);
                nodes.push_back(blossom->subblossoms[p + 1]);
                edges_out.push_back(blossom->edges[p + 1]);
                nodes.push_back(blossom->subblossoms[(p + 2) % nsub]);
                p = (p + 2) % nsub;
            }
        }
    }

    void remove_nontrivial(Blossom* blossom) {
        auto it = std::find(nontrivial_blossom_.begin(),
                            nontrivial_blossom_.end(), blossom);
        nontrivial_blossom_.erase(it);
    }

    void expand_t_blossom(Blossom* blossom) {
        for (Blossom* sub : blossom->subblossoms) {
            sub->parent = nullptr;
            if (sub->nontrivial) {
                std::vector<int> sv;
                sub->collect_vertices(sv);
                for (int x : sv)
                    vertex_top_blossom_[x] = sub;
            } else {
                vertex_top_blossom_[sub->base_vertex] = sub;
            }
        }

        auto [x, y] = blossom->tree_edge;
        (void)x;
        Blossom* sub = vertex_top_blossom_[y];
        sub->label = LABEL_T;
        sub->has_tree_edge = true;
        sub->tree_edge = blossom->tree_edge;

        std::vector<Blossom*> path_nodes;
        std::vector<std::pair<int, int>> path_edges;
        find_path_through_blossom(blossom, sub, path_nodes, path_edges);

        for (size_t p = 0; p + 1 < path_edges.size(); p += 2) {
            int sx = path_edges[p].second;
            assign_label_s(sx);
            Blossom* nsub = path_nodes[p + 2];
            nsub->label = LABEL_T;
            nsub->has_tree_edge = true;
            nsub->tree_edge = path_edges[p + 1];
        }
        remove_nontrivial(blossom);
    }

    void expand_blossom_rec(Blossom* blossom, std::vector<Blossom*>& stack) {
        for (Blossom* sub : blossom->subblossoms) {
            sub->parent = nullptr;
            if (sub->nontrivial) {
                if (sub->dual_var == 0.0) {
                    stack.push_back(sub);
                } else {
                    std::vector<int> sv;
                    sub->collect_vertices(sv);
                    for (int x : sv)
                        vertex_top_blossom_[x] = sub;
                }
            } else {
                vertex_top_blossom_[sub->base_vertex] = sub;
            }
        }
        remove_nontrivial(blossom);
    }

    void expand_zero_dual_blossoms() {
        std::vector<Blossom*> stack;
        for (Blossom* b : nontrivial_blossom_) {
            if (b->parent == nullptr && b->dual_var == 0.0)
                stack.push_back(b);
        }
        while (!stack.empty()) {
            Blossom* b = stack.back();
            stack.pop_back();
            expand_blossom_rec(b, stack);
        }
    }

    void augment_blossom_rec(Blossom* blossom, Blossom* sub,
                             std::vector<std::pair<Blossom*, Blossom*>>& stack) {
        std::vector<Blossom*> path_nodes;
        std::vector<std::pair<int, int>> path_edges;
        find_path_through_blossom(blossom, sub, path_nodes, path_edges);

        for (size_t p = 0; p + 1 < path_edges.size(); p += 2) {
            auto [x, y] = path_edges[p + 1];
            vertex_mate_[x] = y;
            vertex_mate_[y] = x;
            Blossom* bx = path_nodes[p + 1];
            if (bx->nontrivial)
                stack.emplace_back(bx, trivial_blossom_[x]);
            Blossom* by = path_nodes[p + 2];
            if (by->nontrivial)
                stack.emplace_back(by, trivial_blossom_[y]);
        }

        int nsub = (int)blossom->subblossoms.size();
        int p = 0;
        for (int i = 0; i < nsub; ++i) {
            if (blossom->subblossoms[i] == sub) {
                p = i;
                break;
            }
        }
        std::rotate(blossom->subblossoms.begin(),
                    blossom->subblossoms.begin() + p,
                    blossom->subblossoms.end());
        std::rotate(blossom->edges.begin(), blossom->edges.begin() + p,
                    blossom->edges.end());
        blossom->base_vertex = sub->base_vertex;
    }

    void augment_blossom(Blossom* blossom, Blossom* sub) {
        std::vector<std::pair<Blossom*, Blossom*>> stack{{blossom, sub}};
        while (!stack.empty()) {
            auto [outer_blossom, cur_sub] = stack.back();
            stack.pop_back();
            Blossom* parent = cur_sub->parent;
            if (parent != outer_blossom)
                stack.emplace_back(outer_blossom, parent);
            augment_blossom_rec(parent, cur_sub, stack);
        }
    }

    void augment_matching(const AlternatingPath& path) {
        for (size_t i = 0; i < path.edges.size(); i += 2) {
            auto [x, y] = path.edges[i];
            Blossom* bx = vertex_top_blossom_[x];
            if (bx->nontrivial)
                augment_blossom(bx, trivial_blossom_[x]);
            Blossom* by = vertex_top_blossom_[y];
            if (by->nontrivial)
                augment_blossom(by, trivial_blossom_[y]);
            vertex_mate_[x] = y;
            vertex_mate_[y] = x;
        }
    }

    void assign_label_s(int x) {
        Blossom* bx = vertex_top_blossom_[x];
        bx->label = LABEL_S;
        int y = vertex_mate_[x];
        if (y == -1) {
            bx->has_tree_edge = false;
        } else {
            bx->has_tree_edge = true;
            bx->tree_edge = {y, x};
        }
        lset_new_blossom(bx);
        std::vector<int> verts;
        bx->collect_vertices(verts);
        queue_.insert(queue_.end(), verts.begin(), verts.end());
    }

    void assign_label_t(int x, int y) {
        Blossom* by = vertex_top_blossom_[y];
        by->label = LABEL_T;
        by->has_tree_edge = true;
        by->tree_edge = {x, y};
        int z = vertex_mate_[by->base_vertex];
        assign_label_s(z);
    }

    bool add_s_to_s_edge(int x, int y, AlternatingPath& out) {
        AlternatingPath path = trace_alternating_paths(x, y);
        int p = path.edges.front().first;
        int q = path.edges.back().second;
        if (vertex_top_blossom_[p] == vertex_top_blossom_[q]) {
            make_blossom(path);
            return false;
        }
        out = std::move(path);
        return true;
    }

    bool substage_scan(AlternatingPath& out) {
        while (!queue_.empty()) {
            int x = queue_.back();
            queue_.pop_back();

            for (int e : adjacent_edges_[x]) {
                const auto& [p, q, w] = edges_[e];
                (void)w;
                int y = (p != x) ? p : q;
                Blossom* bx = vertex_top_blossom_[x];
                Blossom* by = vertex_top_blossom_[y];
                if (bx == by)
                    continue;
                int ylabel = by->label;
                double slack = edge_slack_2x(e);
                if (slack <= 0.0) {
                    if (ylabel == LABEL_NONE) {
                        assign_label_t(x, y);
                    } else if (ylabel == LABEL_S) {
                        if (add_s_to_s_edge(x, y, out))
                            return true;
                    }
                } else if (ylabel == LABEL_S) {
                    lset_add_blossom_edge(bx, e, slack);
                }
                if (ylabel != LABEL_S)
                    lset_add_vertex_edge(y, e, slack);
            }
        }
        return false;
    }

    std::tuple<int, double, int, Blossom*> substage_calc_dual_delta() {
        int delta_type = 1;
        double delta_2x = std::numeric_limits<double>::infinity();
        int delta_edge = -1;
        Blossom* delta_blossom = nullptr;

        for (int x = 0; x < num_vertex_; ++x) {
            if (vertex_top_blossom_[x]->label == LABEL_S)
                delta_2x = std::min(delta_2x, vertex_dual_2x_[x]);
        }

        auto [e2, slack2] = lset_get_best_vertex_edge();
        if (e2 != -1 && slack2 <= delta_2x) {
            delta_type = 2;
            delta_2x = slack2;
            delta_edge = e2;
        }

        auto [e3, slack3] = lset_get_best_blossom_edge();
        if (e3 != -1) {
            double half = slack3 / 2.0;
            if (half <= delta_2x) {
                delta_type = 3;
                delta_2x = half;
                delta_edge = e3;
            }
        }

        for (Blossom* b : nontrivial_blossom_) {
            if (b->label == LABEL_T && b->parent == nullptr) {
                if (b->dual_var <= delta_2x) {
                    delta_type = 4;
                    delta_2x = b->dual_var;
                    delta_blossom = b;
                }
            }
        }
        return {delta_type, delta_2x, delta_edge, delta_blossom};
    }

    void substage_apply_delta_step(double delta_2x) {
        for (int x = 0; x < num_vertex_; ++x) {
            int xlabel = vertex_top_blossom_[x]->label;
            if (xlabel == LABEL_S)
                vertex_dual_2x_[x] -= delta_2x;
            else if (xlabel == LABEL_T)
                vertex_dual_2x_[x] += delta_2x;
        }
        for (Blossom* b : nontrivial_blossom_) {
            if (b->parent == nullptr) {
                if (b->label == LABEL_S)
                    b->dual_var += delta_2x;
                else if (b->label == LABEL_T)
                    b->dual_var -= delta_2x;
            }
        }
    }

    bool run_stage() {
        for (int x = 0; x < num_vertex_; ++x) {
            if (vertex_mate_[x] == -1)
                assign_label_s(x);
        }
        if (queue_.empty())
            return false;

        AlternatingPath augmenting_path;
        bool found = false;
        while (true) {
            if (substage_scan(augmenting_path)) {
                found = true;
                break;
            }
            auto [delta_type, delta_2x, delta_edge, delta_blossom] =
                substage_calc_dual_delta();
            substage_apply_delta_step(delta_2x);

            if (delta_type == 2) {
                auto [x, y, w] = edges_[delta_edge];
                (void)w;
                if (vertex_top_blossom_[x]->label != LABEL_S)
                    std::swap(x, y);
                assign_label_t(x, y);
            } else if (delta_type == 3) {
                auto [x, y, w] = edges_[delta_edge];
                (void)w;
                if (add_s_to_s_edge(x, y, augmenting_path)) {
                    found = true;
                    break;
                }
            } else if (delta_type == 4) {
                expand_t_blossom(delta_blossom);
            } else {
                break;
            }
        }

        if (found)
            augment_matching(augmenting_path);
        expand_zero_dual_blossoms();
        reset_stage();
        return found;
    }

    std::vector<Edge> edges_;
    int num_vertex_;
    std::vector<std::vector<int>> adjacent_edges_;
    std::vector<int> vertex_mate_;
    std::deque<Blossom> pool_;
    std::vector<Blossom*> trivial_blossom_;
    std::vector<Blossom*> nontrivial_blossom_;
    std::vector<Blossom*> vertex_top_blossom_;
    std::vector<double> vertex_dual_2x_;
    std::vector<int> vertex_best_edge_;
    std::vector<int> queue_;
};

// Maximum-weight matching; returns mate vector (-1 for unmatched).
// Edges with negative weight are ignored.
std::vector<int> maximum_weight_matching(int num_vertex,
                                         const std::vector<Edge>& edges) {
    std::vector<Edge> kept;
    kept.reserve(edges.size());
    for (const Edge& e : edges) {
        if (std::get<2>(e) >= 0.0)
            kept.push_back(e);
    }
    if (kept.empty())
        return std::vector<int>(num_vertex, -1);
    MatchingContext ctx(num_vertex, kept);
    ctx.run();
    return ctx.mates();
}

// Shift weights uniformly so that a maximum-weight matching of the shifted
// graph is a maximum-cardinality matching of the original graph with maximum
// weight among such matchings.
std::vector<Edge> adjust_weights_for_maximum_cardinality_matching(
        int num_vertex, std::vector<Edge> edges) {
    if (edges.empty())
        return edges;
    double min_weight = std::get<2>(edges[0]);
    double max_weight = min_weight;
    for (const Edge& e : edges) {
        min_weight = std::min(min_weight, std::get<2>(e));
        max_weight = std::max(max_weight, std::get<2>(e));
    }
    double weight_range = max_weight - min_weight;
    if (min_weight > 0.0 && min_weight >= num_vertex * weight_range)
        return edges;
    double delta;
    if (weight_range > 0.0)
        delta = num_vertex * weight_range - min_weight;
    else
        delta = 1.0 - min_weight;
    for (Edge& e : edges)
        std::get<2>(e) += delta;
    return edges;
}

// Minimum-weight perfect matching via weight negation and the cardinality
// shift.  Throws if no perfect matching exists.
std::vector<int> minimum_weight_perfect_matching(int num_vertex,
                                                 const std::vector<Edge>& edges) {
    std::vector<Edge> negated;
    negated.reserve(edges.size());
    for (const Edge& e : edges)
        negated.emplace_back(std::get<0>(e), std::get<1>(e), -std::get<2>(e));
    negated = adjust_weights_for_maximum_cardinality_matching(num_vertex,
                                                              negated);
    std::vector<int> mates = maximum_weight_matching(num_vertex, negated);
    for (int x = 0; x < num_vertex; ++x) {
        if (mates[x] == -1)
            throw std::runtime_error("graph admits no perfect matching");
    }
    return mates;
}

}  // namespace mwm

// ---------------------------------------------------------------------------
// Detector graph decoding.
// ---------------------------------------------------------------------------

namespace core {

constexpr double INF = std::numeric_limits<double>::infinity();

// Endpoint encoding: values >= 0 are check-node indices; value -1-c refers
// to boundary component c.  An edge may have one or two boundary endpoints.
struct DetectorGraph {
    int num_nodes = 0;
    int num_comps = 0;
    std::vector<int> eu, ev;
    std::vector<double> weight;

    // CSR adjacency over edges with at least one real endpoint.
    std::vector<int> adj_start;
    std::vector<int> adj_edge;

    // Distance from each node to the nearest boundary (INF if unreachable).
    std::vector<double> bdist;

    // Scratch buffers reused across decode calls.
    mutable std::vector<double> dist;
    mutable std::vector<int> pred;
    mutable std::vector<int> visit_epoch;
    mutable int epoch = 0;

    DetectorGraph(int nodes, int comps, std::vector<int> u, std::vector<int> v,
                  std::vector<double> w)
        : num_nodes(nodes), num_comps(comps), eu(std::move(u)),
          ev(std::move(v)), weight(std::move(w)) {
        if (eu.size() != ev.size() || eu.size() != weight.size())
            throw std::invalid_argument("edge array length mismatch");
        build_adjacency();
        compute_boundary_distances();
        dist.assign(num_nodes, INF);
        pred.assign(num_nodes, -1);
        visit_epoch.assign(num_nodes, 0);
    }

    void build_adjacency() {
        std::vector<int> deg(num_nodes, 0);
        for (size_t e = 0; e < eu.size(); ++e) {
            if (eu[e] >= 0)
                deg[eu[e]]++;
            if (ev[e] >= 0)
                deg[ev[e]]++;
        }
        adj_start.assign(num_nodes + 1, 0);
        for (int x = 0; x < num_nodes; ++x)
            adj_start[x + 1] = adj_start[x] + deg[x];
        adj_edge.assign(adj_start[num_nodes], 0);
        std::vector<int> fill(adj_start.begin(), adj_start.end() - 1);
        for (size_t e = 0; e < eu.size(); ++e) {
            if (eu[e] >= 0)
                adj_edge[fill[eu[e]]++] = (int)e;
            if (ev[e] >= 0 && ev[e] != eu[e])
                adj_edge[fill[ev[e]]++] = (int)e;
        }
    }

    // Multi-source Dijkstra from all boundary components.
    void compute_boundary_distances() {
        bdist.assign(num_nodes, INF);
        using Item = std::pair<double, int>;
        std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
        for (size_t e = 0; e < eu.size(); ++e) {
            bool ub = eu[e] < 0, vb = ev[e] < 0;
            if (ub != vb) {
                int node = ub ? ev[e] : eu[e];
                if (weight[e] < bdist[node]) {
                    bdist[node] = weight[e];
                    heap.emplace(weight[e], node);
                }
            }
        }
        while (!heap.empty()) {
            auto [d, x] = heap.top();
            heap.pop();
            if (d > bdist[x])
                continue;
            for (int i = adj_start[x]; i < adj_start[x + 1]; ++i) {
                int e = adj_edge[i];
                int other = (eu[e] == x) ? ev[e] : eu[e];
                if (other < 0)
                    continue;
                double nd = d + weight[e];
                if (nd < bdist[other]) {
                    bdist[other] = nd;
                    heap.emplace(nd, other);
                }
            }
        }
    }

    // Node parities toggled by a set of edges (boundary endpoints absorb).
    std::vector<int> defects_of(const std::vector<int>& edge_ids) const {
        std::vector<int> touched;
        std::vector<int> parity_nodes;
        static thread_local std::vector<uint8_t> parity;
        if ((int)parity.size() < num_nodes)
            parity.assign(num_nodes, 0);
        for (int e : edge_ids) {
            for (int node : {eu[e], ev[e]}) {
                if (node >= 0) {
                    if (!parity[node])
                        touched.push_back(node);
                    parity[node] ^= 1;
                }
            }
        }
        for (int node : touched) {
            if (parity[node])
                parity_nodes.push_back(node);
            parity[node] = 0;
        }
        std::sort(parity_nodes.begin(), parity_nodes.end());
        return parity_nodes;
    }

    // Bounded Dijkstra from a source defect.  Fills dist/pred for settled
    // nodes (stamped with the current epoch).  Expansion stops beyond
    // "limit" (exactness-preserving radius bound).
    void dijkstra_from(int source, double limit) const {
        ++epoch;
        using Item = std::pair<double, int>;
        std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
        dist[source] = 0.0;
        pred[source] = -1;
        visit_epoch[source] = epoch;
        heap.emplace(0.0, source);
        while (!heap.empty()) {
            auto [d, x] = heap.top();
            heap.pop();
            if (visit_epoch[x] != epoch || d > dist[x])
                continue;
            if (d > limit)
                break;
            for (int i = adj_start[x]; i < adj_start[x + 1]; ++i) {
                int e = adj_edge[i];
                int other = (eu[e] == x) ? ev[e] : eu[e];
                if (other < 0)
                    continue;
                double nd = d + weight[e];
                if (nd > limit)
                    continue;
                if (visit_epoch[other] != epoch || nd < dist[other]) {
                    visit_epoch[other] = epoch;
                    dist[other] = nd;
                    pred[other] = e;
                    heap.emplace(nd, other);
                }
            }
        }
    }

    // Cheapest boundary edge incident to a node (for path termination).
    int best_boundary_edge(int node) const {
        int best = -1;
        double best_w = INF;
        for (int i = adj_start[node]; i < adj_start[node + 1]; ++i) {
            int e = adj_edge[i];
            bool ub = eu[e] < 0, vb = ev[e] < 0;
            if ((ub || vb) && !(ub && vb) && weight[e] < best_w) {
                best_w = weight[e];
                best = e;
            }
        }
        return best;
    }

    // Minimum-weight correction for the given defect set.  Returns edge ids.
    std::vector<int> decode_defects(const std::vector<int>& defects) const;

    std::vector<int> decode(const std::vector<int>& flipped) const {
        return decode_defects(defects_of(flipped));
    }

    double correction_weight(const std::vector<int>& edge_ids) const {
        double total = 0.0;
        for (int e : edge_ids)
            total += weight[e];
        return total;
    }

    // Parity per boundary component of an edge set (bit mask).
    uint32_t comp_parity(const std::vector<int>& edge_ids) const {
        uint32_t mask = 0;
        for (int e : edge_ids) {
            if (eu[e] < 0)
                mask ^= 1u << (-1 - eu[e]);
            if (ev[e] < 0)
                mask ^= 1u << (-1 - ev[e]);
        }
        return mask;
    }
};

std::vector<int> DetectorGraph::decode_defects(
        const std::vector<int>& defects) const {
    std::vector<int> correction;
    int k = (int)defects.size();
    if (k == 0)
        return correction;

    bool all_boundary = true;
    double max_bdist = 0.0;
    for (int v : defects) {
        if (bdist[v] == INF)
            all_boundary = false;
        else
            max_bdist = std::max(max_bdist, bdist[v]);
    }

    // Matching node layout: defects 0..k-1, boundary surrogates k..2k-1.
    std::vector<mwm::Edge> match_edges;
    std::vector<std::vector<int>> pred_snapshot(k);

    std::vector<int> defect_index(num_nodes, -1);
    for (int i = 0; i < k; ++i)
        defect_index[defects[i]] = i;

    for (int i = 0; i < k; ++i) {
        int src = defects[i];
        double limit = all_boundary ? bdist[src] + max_bdist : INF;
        dijkstra_from(src, limit);
        // Record distances to other defects settled in this search.
        for (int j = 0; j < k; ++j) {
            if (j == i)
                continue;
            int v = defects[j];
            if (visit_epoch[v] == epoch && dist[v] < INF) {
                bool keep = true;
                if (bdist[src] < INF && bdist[v] < INF
                        && dist[v] >= bdist[src] + bdist[v])
                    keep = false;  // boundary detour is at least as good
                if (keep && j > i)
                    match_edges.emplace_back(i, j, dist[v]);
            }
        }
        // Snapshot predecessor chains for path extraction.
        pred_snapshot[i].assign(num_nodes, -2);
        for (int v = 0; v < num_nodes; ++v) {
            if (visit_epoch[v] == epoch)
                pred_snapshot[i][v] = pred[v];
        }
        if (bdist[src] < INF)
            match_edges.emplace_back(i, k + i, bdist[src]);
    }

    // Zero-weight edges pair up unused surrogates.  Every surrogate gets
    // them (even for boundary-less defects, whose surrogates can only be
    // matched this way); otherwise an isolated surrogate would make the
    // matching infeasible.
    for (int i = 0; i < k; ++i)
        for (int j = i + 1; j < k; ++j)
            match_edges.emplace_back(k + i, k + j, 0.0);

    int match_n = 2 * k;

    std::vector<int> mates =
        mwm::minimum_weight_perfect_matching(match_n, match_edges);

    // Expand matched pairs into edge paths by re-walking predecessor chains.
    auto walk_path = [&](int src_idx, int target_node) {
        int v = target_node;
        int src = defects[src_idx];
        const std::vector<int>& preds = pred_snapshot[src_idx];
        while (v != src) {
            int e = preds[v];
            correction.push_back(e);
            v = (eu[e] == v) ? ev[e] : eu[e];
        }
    };

    // Re-run needed boundary searches: for defect matched to its surrogate,
    // follow the cheapest boundary route.  The boundary route from "src" is
    // the path minimizing dist(src, x) + w(boundary edge at x); recover it
    // by scanning nodes settled in src's search.
    for (int i = 0; i < k; ++i) {
        int mate = mates[i];
        if (mate < 0)
            throw std::runtime_error("internal error: unmatched defect");
        if (mate < k) {
            if (mate > i)
                walk_path(i, defects[mate]);
        } else {
            int src = defects[i];
            // Find the node whose boundary edge realizes bdist via this
            // search.  bdist was computed by multi-source Dijkstra, so
            // dist(src, x) + bedge(x) == bdist[src] for some settled x.
            int best_node = -1, best_edge = -1;
            double best_total = INF;
            // Redo a bounded search to find the boundary attachment point;
            // it must lie within radius bdist[src] of the defect.
            dijkstra_from(src, bdist[src]);
            for (int v = 0; v < num_nodes; ++v) {
                if (visit_epoch[v] != epoch)
                    continue;
                int be = best_boundary_edge(v);
                if (be < 0)
                    continue;
                double total = dist[v] + weight[be];
                if (total < best_total
                        || (total == best_total && v < best_node)) {
                    best_total = total;
                    best_node = v;
                    best_edge = be;
                }
            }
            if (best_edge < 0)
                throw std::runtime_error("internal error: no boundary route");
            correction.push_back(best_edge);
            int v = best_node;
            while (v != src) {
                int e = pred[v];
                correction.push_back(e);
                v = (eu[e] == v) ? ev[e] : eu[e];
            }
        }
    }

    // Cancel duplicate edges (paths may overlap on ties).
    std::sort(correction.begin(), correction.end());
    std::vector<int> reduced;
    for (size_t i = 0; i < correction.size();) {
        size_t j = i;
        while (j < correction.size() && correction[j] == correction[i])
            ++j;
        if ((j - i) % 2 == 1)
            reduced.push_back(correction[i]);
        i = j;
    }
    return reduced;
}

// ---------------------------------------------------------------------------
// Counter-based per-shot RNG (SplitMix64 stream).
// ---------------------------------------------------------------------------

struct ShotRng {
    uint64_t state;

    ShotRng(uint64_t master_seed, uint64_t shot_index) {
        uint64_t z = master_seed + 0x9E3779B97F4A7C15ULL * (shot_index + 1);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        state = z ^ (z >> 31);
    }

    uint64_t next_u64() {
        uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Uniform double in [0, 1).
    double next_double() {
        return (double)(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform double in (0, 1].
    double next_double_open() {
        return ((double)(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    }
};

// Geometric skip sampling over a list of locations with uniform flip
// probability p: visits each index independently with probability p.
template <typename Fn>
inline void skip_sample(ShotRng& rng, size_t count, double p, double inv_log1mp,
                        Fn&& visit) {
    if (p <= 0.0 || count == 0)
        return;
    if (p >= 1.0) {
        for (size_t i = 0; i < count; ++i)
            visit(i);
        return;
    }
    double r = std::log(rng.next_double_open()) * inv_log1mp;
    size_t i = (r >= (double)count) ? count : (size_t)r;
    while (i < count) {
        visit(i);
        double r2 = std::log(rng.next_double_open()) * inv_log1mp;
        size_t jump = (r2 >= (double)count) ? count : (size_t)r2;
        i += 1 + jump;
    }
}

// A group of single-graph fault locations sharing one flip probability.
struct SingleGroup {
    int graph;  // 0 = first graph, 1 = second graph
    double prob;
    double inv_log1mp;
    std::vector<int> edge_ids;
};

// Correlated two-graph locations (one Pauli draw feeding both graphs).
struct PauliGroup {
    double p_first;   // flips only the first graph's edge
    double p_second;  // flips only the second graph's edge
    double p_both;    // flips both
    double p_any;
    double inv_log1mp;
    std::vector<int> first_edges;   // -1 if absent at this location
    std::vector<int> second_edges;  // -1 if absent
};

struct ShotResult {
    uint32_t mask_a;
    uint32_t mask_b;
    uint8_t failed_homology;
};

class ShotEngine {
public:
    ShotEngine(std::shared_ptr<DetectorGraph> ga,
               std::shared_ptr<DetectorGraph> gb,
               std::vector<PauliGroup> pauli_groups,
               std::vector<SingleGroup> single_groups,
               bool decode_a, bool decode_b)
        : ga_(std::move(ga)), gb_(std::move(gb)),
          pauli_groups_(std::move(pauli_groups)),
          single_groups_(std::move(single_groups)),
          decode_a_(decode_a), decode_b_(decode_b) {
        for (auto& g : pauli_groups_) {
            g.p_any = g.p_first + g.p_second + g.p_both;
            g.inv_log1mp = (g.p_any > 0.0 && g.p_any < 1.0)
                               ? 1.0 / std::log1p(-g.p_any)
                               : 0.0;
        }
        for (auto& g : single_groups_) {
            g.inv_log1mp = (g.prob > 0.0 && g.prob < 1.0)
                               ? 1.0 / std::log1p(-g.prob)
                               : 0.0;
        }
    }

    // Sample the fault configuration for one shot.  Returns per-graph edge
    // id lists (sorted, XOR-reduced).
    std::pair<std::vector<int>, std::vector<int>> sample(uint64_t master_seed,
                                                         uint64_t shot) const {
        ShotRng rng(master_seed, shot);
        std::vector<int> fa, fb;
        sample_into(rng, fa, fb);
        return {fa, fb};
    }

    // Run a batch of shots; returns (mask_a, mask_b, homology_ok) arrays.
    std::tuple<py::array_t<uint32_t>, py::array_t<uint32_t>, uint64_t>
    run(uint64_t master_seed, uint64_t start, uint64_t count,
        bool check_homology) const {
        py::array_t<uint32_t> out_a((py::ssize_t)count);
        py::array_t<uint32_t> out_b((py::ssize_t)count);
        auto* pa = out_a.mutable_data();
        auto* pb = out_b.mutable_data();
        uint64_t violations = 0;
        {
            py::gil_scoped_release release;
            std::vector<int> fa, fb;
            for (uint64_t s = 0; s < count; ++s) {
                ShotRng rng(master_seed, start + s);
                fa.clear();
                fb.clear();
                sample_into(rng, fa, fb);
                uint32_t ma = run_graph(*ga_, fa, decode_a_, check_homology,
                                        violations);
                uint32_t mb = run_graph(*gb_, fb, decode_b_, check_homology,
                                        violations);
                pa[s] = ma;
                pb[s] = mb;
            }
        }
        return {out_a, out_b, violations};
    }

private:
    static uint32_t run_graph(const DetectorGraph& g, std::vector<int>& faults,
                              bool decode, bool check_homology,
                              uint64_t& violations) {
        // XOR-reduce repeated fault edges.
        std::sort(faults.begin(), faults.end());
        std::vector<int> reduced;
        for (size_t i = 0; i < faults.size();) {
            size_t j = i;
            while (j < faults.size() && faults[j] == faults[i])
                ++j;
            if ((j - i) % 2 == 1)
                reduced.push_back(faults[i]);
            i = j;
        }
        uint32_t mask = g.comp_parity(reduced);
        if (!decode || reduced.empty())
            return mask;
        std::vector<int> defects = g.defects_of(reduced);
        if (defects.empty())
            return mask;
        std::vector<int> correction = g.decode_defects(defects);
        if (check_homology) {
            std::vector<int> residual = g.defects_of(correction);
            if (residual != defects)
                ++violations;
        }
        return mask ^ g.comp_parity(correction);
    }

    void sample_into(ShotRng& rng, std::vector<int>& fa,
                     std::vector<int>& fb) const {
        for (const auto& g : pauli_groups_) {
            skip_sample(rng, g.first_edges.size(), g.p_any, g.inv_log1mp,
                        [&](size_t i) {
                            double u = rng.next_double() * g.p_any;
                            bool hit_first, hit_second;
                            if (u < g.p_first) {
                                hit_first = true;
                                hit_second = false;
                            } else if (u < g.p_first + g.p_second) {
                                hit_first = false;
                                hit_second = true;
                            } else {
                                hit_first = true;
                                hit_second = true;
                            }
                            if (hit_first && g.first_edges[i] >= 0)
                                fa.push_back(g.first_edges[i]);
                            if (hit_second && g.second_edges[i] >= 0)
                                fb.push_back(g.second_edges[i]);
                        });
        }
        for (const auto& g : single_groups_) {
            auto& target = (g.graph == 0) ? fa : fb;
            skip_sample(rng, g.edge_ids.size(), g.prob, g.inv_log1mp,
                        [&](size_t i) { target.push_back(g.edge_ids[i]); });
        }
    }

    std::shared_ptr<DetectorGraph> ga_, gb_;
    std::vector<PauliGroup> pauli_groups_;
    std::vector<SingleGroup> single_groups_;
    bool decode_a_, decode_b_;
};

}  // namespace core

PYBIND11_MODULE(_core, m) {
    m.doc() = "Compiled matching, decoding, and sampling core";

    m.def("maximum_weight_matching",
          [](int n, const std::vector<mwm::Edge>& edges) {
              return mwm::maximum_weight_matching(n, edges);
          },
          py::arg("num_vertex"), py::arg("edges"));

    m.def("minimum_weight_perfect_matching",
          [](int n, const std::vector<mwm::Edge>& edges) {
              return mwm::minimum_weight_perfect_matching(n, edges);
          },
          py::arg("num_vertex"), py::arg("edges"));

    py::class_<core::DetectorGraph, std::shared_ptr<core::DetectorGraph>>(
        m, "DetectorGraph")
        .def(py::init<int, int, std::vector<int>, std::vector<int>,
                      std::vector<double>>(),
             py::arg("num_nodes"), py::arg("num_comps"), py::arg("eu"),
             py::arg("ev"), py::arg("weight"))
        .def_readonly("num_nodes", &core::DetectorGraph::num_nodes)
        .def_readonly("num_comps", &core::DetectorGraph::num_comps)
        .def_readonly("bdist", &core::DetectorGraph::bdist)
        .def("defects_of", &core::DetectorGraph::defects_of,
             py::arg("edge_ids"))
        .def("decode", &core::DetectorGraph::decode, py::arg("flipped"))
        .def("decode_defects", &core::DetectorGraph::decode_defects,
             py::arg("defects"))
        .def("correction_weight", &core::DetectorGraph::correction_weight,
             py::arg("edge_ids"))
        .def("comp_parity", &core::DetectorGraph::comp_parity,
             py::arg("edge_ids"));

    py::class_<core::PauliGroup>(m, "PauliGroup")
        .def(py::init([](double p_first, double p_second, double p_both,
                         std::vector<int> first_edges,
                         std::vector<int> second_edges) {
                 core::PauliGroup g;
                 g.p_first = p_first;
                 g.p_second = p_second;
                 g.p_both = p_both;
                 if (first_edges.size() != second_edges.size())
                     throw std::invalid_argument("edge list length mismatch");
                 g.first_edges = std::move(first_edges);
                 g.second_edges = std::move(second_edges);
                 return g;
             }),
             py::arg("p_first"), py::arg("p_second"), py::arg("p_both"),
             py::arg("first_edges"), py::arg("second_edges"));

    py::class_<core::SingleGroup>(m, "SingleGroup")
        .def(py::init([](int graph, double prob, std::vector<int> edge_ids) {
                 core::SingleGroup g;
                 g.graph = graph;
                 g.prob = prob;
                 g.edge_ids = std::move(edge_ids);
                 return g;
             }),
             py::arg("graph"), py::arg("prob"), py::arg("edge_ids"));

    py::class_<core::ShotEngine>(m, "ShotEngine")
        .def(py::init<std::shared_ptr<core::DetectorGraph>,
                      std::shared_ptr<core::DetectorGraph>,
                      std::vector<core::PauliGroup>,
                      std::vector<core::SingleGroup>, bool, bool>(),
             py::arg("graph_a"), py::arg("graph_b"), py::arg("pauli_groups"),
             py::arg("single_groups"), py::arg("decode_a"),
             py::arg("decode_b"))
        .def("sample", &core::ShotEngine::sample, py::arg("master_seed"),
             py::arg("shot"))
        .def("run", &core::ShotEngine::run, py::arg("master_seed"),
             py::arg("start"), py::arg("count"),
             py::arg("check_homology") = false);
}
