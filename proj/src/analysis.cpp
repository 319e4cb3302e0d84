#include "ntd/analysis.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <stdexcept>

#include "json.hpp"
#include "ntd/common.hpp"
#include "ntd/io_util.hpp"

namespace ntd {

CommunityAssignment assign_communities(const Decomposition& dec) {
  return assign_communities(dec, {});
}

CommunityAssignment assign_communities(const Decomposition& dec,
                                       const std::vector<UnitRef>& units) {
  const Mat& T = dec.T;
  if (!units.empty() && units.size() != T.rows)
    throw shape_error("assign_communities: unit list length != rows of T");

  CommunityAssignment out;
  out.soft = T;
  out.labels.resize(T.rows);
  out.members.resize(T.cols);
  std::size_t n_unassigned = 0;
  for (std::size_t k = 0; k < T.rows; ++k) {
    const double* row = T.row(k);
    std::size_t best = 0;
    bool all_zero = true;
    for (std::size_t c = 0; c < T.cols; ++c) {
      if (row[c] != 0.0) all_zero = false;
      if (row[c] > row[best]) best = c;  // strict >, ties keep the lowest index
    }
    if (all_zero) {
      out.labels[k] = kUnassigned;
      ++n_unassigned;
      if (!units.empty()) out.unassigned_units.push_back(units[k]);
    } else {
      out.labels[k] = static_cast<int>(best);
      if (!units.empty()) out.members[best].push_back(units[k]);
    }
  }
  for (auto& m : out.members)
    std::sort(m.begin(), m.end(), [](const UnitRef& a, const UnitRef& b) {
      return a.layer != b.layer ? a.layer < b.layer : a.index < b.index;
    });
  if (n_unassigned > 0)
    warn("assign_communities: " + std::to_string(n_unassigned) +
         " unit(s) have an all-zero weight row and stay unassigned");
  return out;
}

namespace {

/// Best injective matching from communities to blocks (or the transpose
/// when blocks are fewer), maximizing matched units. Exhaustive; both sides
/// are <= 8 in every supported experiment.
void best_matching(const std::vector<std::vector<std::size_t>>& count,
                   std::size_t n_comm, std::size_t n_block,
                   std::vector<int>& matching, std::size_t& best_hits) {
  const bool comm_small = n_comm <= n_block;
  const std::size_t small = comm_small ? n_comm : n_block;
  const std::size_t large = comm_small ? n_block : n_comm;
  std::vector<std::size_t> perm(large);
  std::iota(perm.begin(), perm.end(), std::size_t{0});

  best_hits = 0;
  bool found = false;
  std::vector<std::size_t> best_perm(perm.begin(), perm.begin() + small);
  // Enumerate ordered selections of `small` items out of `large`; ties keep
  // the first (lexicographically smallest) selection.
  std::vector<std::size_t> pick(small);
  std::vector<bool> used(large, false);
  std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t depth,
                                                          std::size_t hits) {
    if (depth == small) {
      if (!found || hits > best_hits) {
        found = true;
        best_hits = hits;
        best_perm.assign(pick.begin(), pick.end());
      }
      return;
    }
    for (std::size_t v = 0; v < large; ++v) {
      if (used[v]) continue;
      used[v] = true;
      pick[depth] = v;
      const std::size_t add = comm_small ? count[depth][v] : count[v][depth];
      rec(depth + 1, hits + add);
      used[v] = false;
    }
  };
  rec(0, 0);

  matching.assign(n_comm, -1);
  if (comm_small) {
    for (std::size_t c = 0; c < small; ++c)
      matching[c] = static_cast<int>(best_perm[c]);
  } else {
    for (std::size_t b = 0; b < small; ++b)
      matching[best_perm[b]] = static_cast<int>(b);
  }
}

}  // namespace

RecoveryScore score_recovery(const CommunityAssignment& assign,
                             const GroundTruth& truth, const Mat& U,
                             std::size_t input_block_width) {
  const std::size_t k0 = assign.labels.size();
  if (truth.hidden_labels.size() != k0)
    throw shape_error("score_recovery: truth has " +
                      std::to_string(truth.hidden_labels.size()) +
                      " hidden labels for " + std::to_string(k0) + " units");
  const std::size_t c0 = assign.soft.cols;
  if (c0 > 8)
    throw std::invalid_argument("score_recovery: exhaustive matching supports c0 <= 8");
  int max_block = 0;
  for (int b : truth.hidden_labels) max_block = std::max(max_block, b);
  const std::size_t n_block = static_cast<std::size_t>(max_block) + 1;

  std::vector<std::vector<std::size_t>> count(c0, std::vector<std::size_t>(n_block, 0));
  for (std::size_t k = 0; k < k0; ++k) {
    const int c = assign.labels[k];
    if (c >= 0) ++count[c][truth.hidden_labels[k]];
  }

  RecoveryScore score;
  score.partial = (c0 != n_block);
  std::size_t hits = 0;
  best_matching(count, c0, n_block, score.matching, hits);
  score.purity = static_cast<double>(hits) / static_cast<double>(k0);

  // Mass of each task on its matched block's input+output columns.
  if (U.cols != truth.input_labels.size() + truth.output_labels.size())
    throw shape_error("score_recovery: U columns do not match truth label counts");
  score.concentrations.assign(c0, 0.0);
  for (std::size_t c = 0; c < c0; ++c) {
    const int b = score.matching[c];
    if (b < 0) continue;
    double on_block = 0.0, total = 0.0;
    for (std::size_t l = 0; l < U.cols; ++l) {
      const int col_block = l < input_block_width
                                ? truth.input_labels[l]
                                : truth.output_labels[l - input_block_width];
      total += U(c, l);
      if (col_block == b) on_block += U(c, l);
    }
    score.concentrations[c] = total > 0.0 ? on_block / total : 0.0;
  }
  return score;
}

std::vector<std::pair<std::size_t, double>> task_importance(
    const Decomposition& dec, std::size_t input_block_width) {
  const Mat& T = dec.T;
  const Mat& U = dec.U;
  if (input_block_width >= U.cols)
    throw shape_error("task_importance: input block spans all of U");
  std::vector<std::pair<std::size_t, double>> imp(U.rows);
  for (std::size_t c = 0; c < U.rows; ++c) {
    double tsum = 0.0;
    for (std::size_t k = 0; k < T.rows; ++k) tsum += T(k, c);
    double out_mass = 0.0;
    for (std::size_t l = input_block_width; l < U.cols; ++l) out_mass += U(c, l);
    imp[c] = {c, tsum * out_mass};
  }
  std::stable_sort(imp.begin(), imp.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  return imp;
}

std::string assignment_to_json(const CommunityAssignment& assign) {
  nlohmann::ordered_json j;
  j["schema_version"] = 1;
  j["labels"] = assign.labels;
  j["soft"] = {{"rows", assign.soft.rows}, {"cols", assign.soft.cols},
               {"data", assign.soft.data}};
  auto members = nlohmann::ordered_json::array();
  for (const auto& m : assign.members) {
    auto lst = nlohmann::ordered_json::array();
    for (const UnitRef& u : m) lst.push_back({{"layer", u.layer}, {"unit", u.index}});
    members.push_back(std::move(lst));
  }
  j["members"] = std::move(members);
  auto un = nlohmann::ordered_json::array();
  for (const UnitRef& u : assign.unassigned_units)
    un.push_back({{"layer", u.layer}, {"unit", u.index}});
  j["unassigned"] = std::move(un);
  return j.dump();
}

std::string assignment_to_csv(const CommunityAssignment& assign,
                              const std::vector<UnitRef>& units) {
  if (units.size() != assign.labels.size())
    throw shape_error("assignment_to_csv: unit list length mismatch");
  std::string csv = "unit,layer,community";
  for (std::size_t c = 0; c < assign.soft.cols; ++c)
    csv += ",weight_" + std::to_string(c);
  csv += "\n";
  for (std::size_t k = 0; k < units.size(); ++k) {
    csv += std::to_string(units[k].index) + "," + std::to_string(units[k].layer) +
           "," + std::to_string(assign.labels[k]);
    for (std::size_t c = 0; c < assign.soft.cols; ++c) {
      csv += ",";
      csv += fmt_double_sig9(assign.soft(k, c));
    }
    csv += "\n";
  }
  return csv;
}

std::string score_to_json(
    const RecoveryScore& score,
    const std::vector<std::pair<std::size_t, double>>& importances) {
  nlohmann::ordered_json j;
  j["schema_version"] = 1;
  j["purity"] = score.purity;
  j["matching"] = score.matching;
  j["concentrations"] = score.concentrations;
  j["partial_matching"] = score.partial;
  auto imp = nlohmann::ordered_json::array();
  for (const auto& [task, value] : importances)
    imp.push_back({{"task", task}, {"importance", value}});
  j["importances"] = std::move(imp);
  return j.dump();
}

}  // namespace ntd
