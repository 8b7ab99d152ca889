#include "egotop/affinity_bank.hpp"

#include <algorithm>
#include <optional>
#include <sstream>

#include "fft_correlation.hpp"

namespace egotop {

struct AffinityBank::Storage {
    ViewGraph top;
    FeatureConfig fcfg;
    CorrConfig ccfg;
    int lag = 0;
    std::size_t n_ego = 0;
    std::size_t n_top = 0;

    // Indexed by i * n_top + k.
    std::vector<CorrelationSurface> node_img;
    std::vector<std::optional<Corr2Max>> node_img_best;
    std::vector<Eigen::VectorXd> node_cnt;
    std::vector<std::optional<Corr1Max>> node_cnt_best;

    // Indexed by pair(i, j) * n_top^2 + k * n_top + l, for i < j and k != l.
    std::vector<CorrelationSurface> edge;
    std::vector<std::optional<Corr2Max>> edge_best;

    std::size_t pair(std::size_t i, std::size_t j) const { return i * n_ego - i * (i + 1) / 2 + (j - i - 1); }
    std::size_t edge_slot(std::size_t i, std::size_t j, std::size_t k, std::size_t l) const {
        return pair(i, j) * n_top * n_top + k * n_top + l;
    }
};

namespace {

template <class T, class F>
std::optional<T> try_best(F&& f) {
    try {
        return f();
    } catch (const InsufficientOverlap&) {
        return std::nullopt;
    }
}

}  // namespace

AffinityBank::AffinityBank(const ViewGraph& ego, const ViewGraph& top, const FeatureConfig& fcfg,
                           const CorrConfig& ccfg)
    : ego_(ego) {
    fcfg.validate();
    ccfg.validate();
    if (ego.kind() != ViewKind::Ego || top.kind() != ViewKind::Top) throw InvalidInput("bank needs an ego and a top graph");
    if (ego.size() > top.size()) throw InvalidInput("more ego videos than top-view viewers");

    auto s = std::make_shared<Storage>();
    s->top = top;
    s->fcfg = fcfg;
    s->ccfg = ccfg;
    s->lag = resolve_max_lag(ego, top, ccfg);
    s->n_ego = ego.size();
    s->n_top = top.size();
    const std::size_t ne = s->n_ego, nt = s->n_top;
    const int lag = s->lag;
    const double min_ov = ccfg.min_overlap_fraction;
    const bool diag_nodes = ccfg.diagonal_only_for_nodes;

    Eigen::Index longest = 0;
    for (std::size_t i = 0; i < ne; ++i) longest = std::max<Eigen::Index>(longest, static_cast<Eigen::Index>(ego.frames(i)));
    for (std::size_t k = 0; k < nt; ++k) longest = std::max<Eigen::Index>(longest, static_cast<Eigen::Index>(top.frames(k)));
    const int grid = detail::fft_size(static_cast<int>(longest) + lag);

    std::vector<detail::SpectralOperand> top_nodes;
    top_nodes.reserve(nt);
    for (std::size_t k = 0; k < nt; ++k) top_nodes.emplace_back(top.node(k), grid, grid);

    s->node_img.resize(ne * nt);
    s->node_img_best.resize(ne * nt);
    s->node_cnt.resize(ne * nt);
    s->node_cnt_best.resize(ne * nt);
    for (std::size_t i = 0; i < ne; ++i) {
        const detail::SpectralOperand op(ego.node(i), grid, grid);
        for (std::size_t k = 0; k < nt; ++k) {
            const std::size_t idx = i * nt + k;
            s->node_img[idx] = detail::correlation_surface(op, top_nodes[k], lag, min_ov);
            s->node_img_best[idx] = try_best<Corr2Max>([&] { return s->node_img[idx].best(diag_nodes); });
            s->node_cnt[idx] = correlation_profile(ego.counts(i), top.counts(k), lag, min_ov);
            s->node_cnt_best[idx] = try_best<Corr1Max>([&]() -> Corr1Max {
                std::optional<Corr1Max> b;
                for (int d = -lag; d <= lag; ++d) {
                    const double v = s->node_cnt[idx](d + lag);
                    if (std::isnan(v)) continue;
                    if (!b || improves(v, {d, 0}, b->value, {b->offset, 0})) b = Corr1Max{v, d};
                }
                if (!b) throw InsufficientOverlap("no admissible count offset");
                return *b;
            });
        }
    }
    top_nodes.clear();

    if (ne >= 2 && nt >= 2) {
        std::vector<std::optional<detail::SpectralOperand>> top_edges(nt * nt);
        for (std::size_t k = 0; k < nt; ++k)
            for (std::size_t l = 0; l < nt; ++l) {
                if (k == l) continue;
                if (k < l)
                    top_edges[k * nt + l].emplace(top.edge_upper(k, l), grid, grid);
                else
                    top_edges[k * nt + l].emplace(Eigen::MatrixXd(top.edge_upper(l, k).transpose()), grid, grid);
            }
        s->edge.resize(ne * (ne - 1) / 2 * nt * nt);
        s->edge_best.resize(s->edge.size());
        for (std::size_t i = 0; i < ne; ++i)
            for (std::size_t j = i + 1; j < ne; ++j) {
                const detail::SpectralOperand op(ego.edge_upper(i, j), grid, grid);
                for (std::size_t k = 0; k < nt; ++k)
                    for (std::size_t l = 0; l < nt; ++l) {
                        if (k == l) continue;
                        const std::size_t slot = s->edge_slot(i, j, k, l);
                        s->edge[slot] = detail::correlation_surface(op, *top_edges[k * nt + l], lag, min_ov);
                        s->edge_best[slot] = try_best<Corr2Max>([&] { return s->edge[slot].best(false); });
                    }
            }
    }

    storage_ = std::move(s);
    ego_map_.resize(ne);
    for (std::size_t i = 0; i < ne; ++i) ego_map_[i] = i;
}

AffinityBank::AffinityBank(std::shared_ptr<const Storage> storage, ViewGraph ego, std::vector<std::size_t> map)
    : storage_(std::move(storage)), ego_(std::move(ego)), ego_map_(std::move(map)) {}

std::size_t AffinityBank::n_top() const { return storage_->n_top; }
int AffinityBank::max_lag() const { return storage_->lag; }
const ViewGraph& AffinityBank::top() const { return storage_->top; }
const FeatureConfig& AffinityBank::feature_config() const { return storage_->fcfg; }
const CorrConfig& AffinityBank::corr_config() const { return storage_->ccfg; }

AffinityBank AffinityBank::subset(std::span<const std::size_t> ego_nodes) const {
    std::vector<std::size_t> map;
    for (std::size_t a : ego_nodes) {
        if (a >= n_ego()) throw InvalidInput("subset index out of range");
        map.push_back(ego_map_[a]);
    }
    return AffinityBank(storage_, ego_.subset(ego_nodes), std::move(map));
}

Corr2Max AffinityBank::node_image_best(std::size_t i, std::size_t k) const {
    const auto& b = storage_->node_img_best[ego_map_[i] * storage_->n_top + k];
    if (!b) throw InsufficientOverlap("node image correlation has no admissible offset");
    return *b;
}

Corr1Max AffinityBank::node_count_best(std::size_t i, std::size_t k) const {
    const auto& b = storage_->node_cnt_best[ego_map_[i] * storage_->n_top + k];
    if (!b) throw InsufficientOverlap("node count correlation has no admissible offset");
    return *b;
}

double AffinityBank::node_value(std::size_t i, std::size_t k, int d) const {
    const std::size_t idx = ego_map_[i] * storage_->n_top + k;
    const int lag = storage_->lag;
    double img = storage_->node_img[idx].at({d, d});
    double cnt = std::abs(d) <= lag ? storage_->node_cnt[idx](d + lag) : std::nan("");
    if (std::isnan(img)) img = 0.0;
    if (std::isnan(cnt)) cnt = 0.0;
    const double a = storage_->fcfg.alpha;
    return a * img + (1.0 - a) * cnt;
}

double AffinityBank::node_best(std::size_t i, std::size_t k) const {
    const std::size_t idx = ego_map_[i] * storage_->n_top + k;
    const auto& img = storage_->node_img_best[idx];
    const auto& cnt = storage_->node_cnt_best[idx];
    const double a = storage_->fcfg.alpha;
    return a * (img ? img->value : 0.0) + (1.0 - a) * (cnt ? cnt->value : 0.0);
}

double AffinityBank::edge_value(std::size_t i, std::size_t j, std::size_t k, std::size_t l, Offset2D off) const {
    const std::size_t oi = ego_map_[i], oj = ego_map_[j];
    if (oi == oj || k == l) throw InvalidInput("edge lookup needs two distinct nodes on each side");
    if (oi < oj) return storage_->edge[storage_->edge_slot(oi, oj, k, l)].at(off);
    return storage_->edge[storage_->edge_slot(oj, oi, l, k)].at({off.dj, off.di});
}

Corr2Max AffinityBank::edge_best(std::size_t i, std::size_t j, std::size_t k, std::size_t l) const {
    const std::size_t oi = ego_map_[i], oj = ego_map_[j];
    if (oi == oj || k == l) throw InvalidInput("edge lookup needs two distinct nodes on each side");
    const bool swap = oi > oj;
    const auto& b = swap ? storage_->edge_best[storage_->edge_slot(oj, oi, l, k)]
                         : storage_->edge_best[storage_->edge_slot(oi, oj, k, l)];
    if (!b) throw InsufficientOverlap("edge correlation has no admissible offset");
    if (!swap) return *b;
    return Corr2Max{b->value, Offset2D{b->offset.dj, b->offset.di}};
}

namespace {

AffinityMatrix empty_affinity(std::size_t ne, std::size_t nt) {
    AffinityMatrix A;
    A.n_ego = ne;
    A.n_top = nt;
    A.data = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(ne * nt), static_cast<Eigen::Index>(ne * nt));
    return A;
}

std::string describe(const char* what, std::size_t i, std::size_t k, std::size_t j, std::size_t l) {
    std::ostringstream os;
    os << what << " ego(" << i << "," << j << ") top(" << k << "," << l << ") has insufficient overlap; treated as 0";
    return os.str();
}

}  // namespace

AffinityMatrix AffinityBank::free() const {
    const std::size_t ne = n_ego(), nt = n_top();
    AffinityMatrix A = empty_affinity(ne, nt);
    const std::size_t* map = ego_map_.data();
    for (std::size_t i = 0; i < ne; ++i)
        for (std::size_t k = 0; k < nt; ++k) {
            const std::size_t idx = map[i] * nt + k;
            if (!storage_->node_img_best[idx] || !storage_->node_cnt_best[idx])
                A.diagnostics.push_back(describe("node", i, k, i, k));
            A.data(A.index(i, k), A.index(i, k)) = std::max(0.0, node_best(i, k));
        }
    for (std::size_t i = 0; i < ne; ++i)
        for (std::size_t j = i + 1; j < ne; ++j)
            for (std::size_t k = 0; k < nt; ++k)
                for (std::size_t l = 0; l < nt; ++l) {
                    if (k == l) continue;
                    double v = 0.0;
                    try {
                        v = std::max(0.0, edge_best(i, j, k, l).value);
                    } catch (const InsufficientOverlap&) {
                        A.diagnostics.push_back(describe("edge", i, k, j, l));
                    }
                    A.data(A.index(i, k), A.index(j, l)) = v;
                    A.data(A.index(j, l), A.index(i, k)) = v;
                }
    return A;
}

double AffinityBank::entry_fixed(std::size_t i, std::size_t k, std::size_t j, std::size_t l,
                                 std::span<const int> delays, std::vector<std::string>* diag) const {
    if (i == j) {
        const std::size_t idx = ego_map_[i] * storage_->n_top + k;
        const int d = delays[i];
        if (diag && (std::isnan(storage_->node_img[idx].at({d, d})) || std::isnan(storage_->node_cnt[idx](d + storage_->lag))))
            diag->push_back(describe("node", i, k, i, k));
        return std::max(0.0, node_value(i, k, d));
    }
    const double v = edge_value(i, j, k, l, Offset2D{delays[i], delays[j]});
    if (std::isnan(v)) {
        if (diag) diag->push_back(describe("edge", i, k, j, l));
        return 0.0;
    }
    return std::max(0.0, v);
}

AffinityMatrix AffinityBank::fixed(std::span<const int> delays) const {
    const std::size_t ne = n_ego(), nt = n_top();
    if (delays.size() != ne) throw DimensionMismatch("one delay per ego video is required");
    for (int d : delays)
        if (std::abs(d) > storage_->lag) throw InvalidInput("delay outside the bank's lag window");
    AffinityMatrix A = empty_affinity(ne, nt);
    for (std::size_t i = 0; i < ne; ++i)
        for (std::size_t k = 0; k < nt; ++k)
            A.data(A.index(i, k), A.index(i, k)) = entry_fixed(i, k, i, k, delays, &A.diagnostics);
    for (std::size_t i = 0; i < ne; ++i)
        for (std::size_t j = i + 1; j < ne; ++j)
            for (std::size_t k = 0; k < nt; ++k)
                for (std::size_t l = 0; l < nt; ++l) {
                    if (k == l) continue;
                    const double v = entry_fixed(i, k, j, l, delays, &A.diagnostics);
                    A.data(A.index(i, k), A.index(j, l)) = v;
                    A.data(A.index(j, l), A.index(i, k)) = v;
                }
    return A;
}

void AffinityBank::refresh(AffinityMatrix& A, std::span<const int> delays, std::size_t moved) const {
    const std::size_t ne = n_ego(), nt = n_top();
    if (A.n_ego != ne || A.n_top != nt || delays.size() != ne) throw DimensionMismatch("affinity does not fit the bank");
    if (std::abs(delays[moved]) > storage_->lag) throw InvalidInput("delay outside the bank's lag window");
    for (std::size_t k = 0; k < nt; ++k)
        A.data(A.index(moved, k), A.index(moved, k)) = entry_fixed(moved, k, moved, k, delays, nullptr);
    for (std::size_t other = 0; other < ne; ++other) {
        if (other == moved) continue;
        const std::size_t i = std::min(moved, other), j = std::max(moved, other);
        for (std::size_t k = 0; k < nt; ++k)
            for (std::size_t l = 0; l < nt; ++l) {
                if (k == l) continue;
                const double v = entry_fixed(i, k, j, l, delays, nullptr);
                A.data(A.index(i, k), A.index(j, l)) = v;
                A.data(A.index(j, l), A.index(i, k)) = v;
            }
    }
}

std::vector<int> AffinityBank::delay_suggestions(std::size_t i) const {
    std::vector<int> out;
    const std::size_t nt = n_top();
    for (std::size_t k = 0; k < nt; ++k) {
        const auto& b = storage_->node_img_best[ego_map_[i] * nt + k];
        if (b) out.push_back(b->offset.di);
    }
    for (std::size_t j = 0; j < n_ego(); ++j) {
        if (j == i) continue;
        for (std::size_t k = 0; k < nt; ++k)
            for (std::size_t l = 0; l < nt; ++l) {
                if (k == l) continue;
                try {
                    out.push_back(edge_best(i, j, k, l).offset.di);
                } catch (const InsufficientOverlap&) {
                }
            }
    }
    return out;
}

}  // namespace egotop
