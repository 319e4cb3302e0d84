#pragma once

#include <string>
#include <vector>

#include "ntd/attribution.hpp"
#include "ntd/datasets.hpp"
#include "ntd/nmf.hpp"

namespace ntd {

inline constexpr int kUnassigned = -1;

/// Hard community labels (argmax over each row of T, ties to the lowest
/// index, all-zero rows unassigned) with the soft weights kept alongside.
struct CommunityAssignment {
  std::vector<int> labels;                     // per hidden unit, -1 = unassigned
  Mat soft;                                    // copy of T
  std::vector<std::vector<UnitRef>> members;   // per community, sorted by (layer, unit)
  std::vector<UnitRef> unassigned_units;
};

CommunityAssignment assign_communities(const Decomposition& dec);
CommunityAssignment assign_communities(const Decomposition& dec,
                                       const std::vector<UnitRef>& units);

/// Recovery of planted blocks: purity under the best community<->block
/// bijection (exhaustive, c0 <= 8) and the mass concentration of each task
/// on its matched block's columns.
struct RecoveryScore {
  std::vector<int> matching;          // community c -> block, -1 if unmatched
  double purity = 0.0;
  std::vector<double> concentrations; // per community; 0 when unmatched
  bool partial = false;               // c0 != block count, injective matching used
};

RecoveryScore score_recovery(const CommunityAssignment& assign,
                             const GroundTruth& truth, const Mat& U,
                             std::size_t input_block_width);

/// importance(c) = sum_k T[k,c] * (mass of U[c,..] on the output block),
/// sorted descending.
std::vector<std::pair<std::size_t, double>> task_importance(
    const Decomposition& dec, std::size_t input_block_width);

std::string assignment_to_json(const CommunityAssignment& assign);
/// Flat csv: unit,layer,community,weight_0..weight_{c0-1}
std::string assignment_to_csv(const CommunityAssignment& assign,
                              const std::vector<UnitRef>& units);
std::string score_to_json(const RecoveryScore& score,
                          const std::vector<std::pair<std::size_t, double>>& importances);

}  // namespace ntd
