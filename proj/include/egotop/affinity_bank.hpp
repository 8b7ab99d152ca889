#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "egotop/correlation.hpp"
#include "egotop/features.hpp"
#include "egotop/matching.hpp"

namespace egotop {

/// Correlation surfaces for every (ego node, top node) and (ego edge, top edge) pairing of
/// two graphs, over all offsets within the lag window. Once built, free-offset and
/// fixed-delay affinities are table lookups, which is what makes the delay searches cheap.
///
/// The bank is immutable; subsets over ego nodes share the underlying surfaces.
class AffinityBank {
public:
    AffinityBank(const ViewGraph& ego, const ViewGraph& top, const FeatureConfig& fcfg, const CorrConfig& ccfg);

    std::size_t n_ego() const { return ego_map_.size(); }
    std::size_t n_top() const;
    int max_lag() const;
    const ViewGraph& ego() const { return ego_; }
    const ViewGraph& top() const;
    const FeatureConfig& feature_config() const;
    const CorrConfig& corr_config() const;

    AffinityMatrix free() const;
    /// Requires |delays[i]| <= max_lag().
    AffinityMatrix fixed(std::span<const int> delays) const;
    /// Recomputes in place the entries of a fixed affinity that involve ego video `moved`.
    void refresh(AffinityMatrix& A, std::span<const int> delays, std::size_t moved) const;

    /// Bank over a subset of the ego videos, in the given order.
    AffinityBank subset(std::span<const std::size_t> ego_nodes) const;

    /// Node terms: image (2D) and count (1D) correlations.
    Corr2Max node_image_best(std::size_t i, std::size_t k) const;
    Corr1Max node_count_best(std::size_t i, std::size_t k) const;
    /// Blended node affinity at diagonal offset d (before clamping); NaN parts count as 0.
    double node_value(std::size_t i, std::size_t k, int d) const;
    /// Blended node affinity at the best offsets (before clamping).
    double node_best(std::size_t i, std::size_t k) const;

    /// Edge (i, j) of the ego graph against edge (k, l) of the top graph, i != j, k != l.
    double edge_value(std::size_t i, std::size_t j, std::size_t k, std::size_t l, Offset2D off) const;
    Corr2Max edge_best(std::size_t i, std::size_t j, std::size_t k, std::size_t l) const;

    /// Delay of ego video i implied by each node and edge correlation maximum.
    std::vector<int> delay_suggestions(std::size_t i) const;

private:
    struct Storage;
    AffinityBank(std::shared_ptr<const Storage> storage, ViewGraph ego, std::vector<std::size_t> map);

    double entry_fixed(std::size_t i, std::size_t k, std::size_t j, std::size_t l, std::span<const int> delays,
                       std::vector<std::string>* diag) const;

    std::shared_ptr<const Storage> storage_;
    ViewGraph ego_;
    std::vector<std::size_t> ego_map_;  // bank index -> index in the graph the storage was built from
};

}  // namespace egotop
