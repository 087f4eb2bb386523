#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rtmix/error.hpp"

namespace rtmix {

/// Errors at or below this are treated as saturated when estimating orders.
inline constexpr double kSaturationFloor = 1e-13;
/// Relative gap on the finest level below which neighbours form a cluster.
inline constexpr double kClusterTolerance = 1e-6;

/// Eliminates the leading C h^p term from values at h and h/2.
inline double richardson(double coarse, double fine, double p = 2.0) {
  if (!(p > 0.0)) throw InvalidArgument("extrapolation order must be positive");
  const double factor = std::exp2(p);
  return (factor * fine - coarse) / (factor - 1.0);
}

struct ObservedOrder {
  bool saturated = false;
  double value = std::numeric_limits<double>::quiet_NaN();

  static ObservedOrder saturated_order() { return {true}; }
};

/// log2(e_i / e_{i+1}) for each consecutive pair; saturated where either
/// error is at or below the floor (this includes non-positive entries).
inline std::vector<ObservedOrder> observed_order(std::span<const double> errors) {
  if (errors.size() < 2) throw InvalidArgument("observed order needs at least two errors");
  std::vector<ObservedOrder> orders;
  orders.reserve(errors.size() - 1);
  for (std::size_t i = 0; i + 1 < errors.size(); ++i) {
    const double a = errors[i], b = errors[i + 1];
    if (!(a > kSaturationFloor) || !(b > kSaturationFloor))
      orders.push_back(ObservedOrder::saturated_order());
    else
      orders.push_back({false, std::log2(a / b)});
  }
  return orders;
}

struct Level {
  int n = 0;
  double h = 0.0;
  std::vector<double> eigenvalues;  // ascending
};

struct LevelSequence {
  std::vector<Level> levels;
  /// matched[i][l]: eigenvalue i on level l.
  std::vector<std::vector<double>> matched;
  /// Groups of adjacent eigenvalue indices treated as one multiple eigenvalue.
  std::vector<std::vector<std::size_t>> clusters;

  /// Arithmetic mean of the cluster members on every level.
  std::vector<double> cluster_values(std::size_t c) const {
    std::vector<double> values(levels.size(), 0.0);
    const auto& members = clusters.at(c);
    for (std::size_t l = 0; l < levels.size(); ++l) {
      for (std::size_t i : members) values[l] += matched[i][l];
      values[l] /= static_cast<double>(members.size());
    }
    return values;
  }
};

/// Matches eigenvalues by ascending index and groups neighbours that share a
/// limit. Neighbours i, i+1 are clustered when their gap is within the
/// relative tolerance either on the finest level or after extrapolating the
/// two finest levels; the second test catches multiple eigenvalues that the
/// mesh splits at O(h^p).
inline LevelSequence match_and_cluster(std::vector<Level> levels, double p = 2.0) {
  if (levels.size() < 2) throw InvalidArgument("extrapolation needs at least two mesh levels");
  const std::size_t k = levels.front().eigenvalues.size();
  for (std::size_t l = 0; l < levels.size(); ++l) {
    if (levels[l].eigenvalues.size() != k)
      throw InvalidArgument("inconsistent eigenvalue count across levels: level n=" +
                            std::to_string(levels[l].n) + " has " +
                            std::to_string(levels[l].eigenvalues.size()) + ", expected " +
                            std::to_string(k));
    if (l > 0 && levels[l].n != 2 * levels[l - 1].n)
      throw InvalidArgument("mesh levels must double: n=" + std::to_string(levels[l - 1].n) +
                            " followed by n=" + std::to_string(levels[l].n));
    for (std::size_t i = 1; i < k; ++i)
      if (levels[l].eigenvalues[i] < levels[l].eigenvalues[i - 1])
        throw InvalidArgument("eigenvalues on level n=" + std::to_string(levels[l].n) +
                              " are not ascending");
  }

  LevelSequence seq;
  seq.matched.assign(k, std::vector<double>(levels.size()));
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t l = 0; l < levels.size(); ++l) seq.matched[i][l] = levels[l].eigenvalues[i];

  const auto& finest = levels.back().eigenvalues;
  const auto& previous = levels[levels.size() - 2].eigenvalues;
  auto close = [](double a, double b) {
    return std::abs(b - a) <= kClusterTolerance * std::max(1.0, std::abs(a));
  };
  for (std::size_t i = 0; i < k; ++i) {
    if (i > 0 && (close(finest[i - 1], finest[i]) ||
                  close(richardson(previous[i - 1], finest[i - 1], p), richardson(previous[i], finest[i], p))))
      seq.clusters.back().push_back(i);
    else
      seq.clusters.push_back({i});
  }
  seq.levels = std::move(levels);
  return seq;
}

enum class ReferenceKind { analytic, self_referenced };

inline const char* to_string(ReferenceKind kind) {
  return kind == ReferenceKind::analytic ? "analytic" : "self-referenced";
}

/// One (eigenvalue-or-cluster, level) row. Empty optionals are "not applicable".
struct TableRow {
  int level_n = 0;
  double h = 0.0;
  double lambda_h = 0.0;
  std::optional<double> lambda_extrap;
  std::optional<double> err_raw;
  std::optional<double> err_extrap;
  std::optional<ObservedOrder> order_raw;
  std::optional<ObservedOrder> order_extrap;
  std::optional<double> superclose;             // D-weighted
  std::optional<double> superclose_unweighted;  // plain L2
  std::optional<double> err_u;
  std::optional<double> err_sigma;
};

struct ConvergenceEntry {
  std::vector<std::size_t> members;
  double reference = 0.0;
  ReferenceKind reference_kind = ReferenceKind::self_referenced;
  std::vector<TableRow> rows;  // one per level

  std::size_t index() const { return members.front(); }
  std::size_t multiplicity() const { return members.size(); }
};

struct ConvergenceTable {
  std::string problem;
  double expansion_order = 2.0;
  std::vector<ConvergenceEntry> entries;
};

namespace detail {

inline std::vector<double> column(const std::vector<TableRow>& rows, std::size_t first,
                                  std::optional<double> TableRow::*field) {
  std::vector<double> out;
  for (std::size_t l = first; l < rows.size(); ++l) out.push_back(*(rows[l].*field));
  return out;
}

}  // namespace detail

/// Extrapolates each cluster's mean and measures observed orders. When
/// analytic eigenvalues are given (one per index), errors are measured
/// against their cluster mean; otherwise against the extrapolated value of
/// the two finest levels.
inline ConvergenceTable build_convergence_table(const LevelSequence& seq, double p,
                                                const std::optional<std::vector<double>>& analytic,
                                                std::string problem = {}) {
  if (!(p > 0.0)) throw InvalidArgument("extrapolation order must be positive");
  if (analytic && analytic->size() < seq.matched.size())
    throw InvalidArgument("fewer analytic eigenvalues than computed eigenvalues");
  const std::size_t num_levels = seq.levels.size();

  ConvergenceTable table;
  table.problem = std::move(problem);
  table.expansion_order = p;
  for (std::size_t c = 0; c < seq.clusters.size(); ++c) {
    ConvergenceEntry entry;
    entry.members = seq.clusters[c];
    const std::vector<double> values = seq.cluster_values(c);
    if (analytic) {
      double sum = 0.0;
      for (std::size_t i : entry.members) sum += (*analytic)[i];
      entry.reference = sum / static_cast<double>(entry.members.size());
      entry.reference_kind = ReferenceKind::analytic;
    } else {
      entry.reference = richardson(values[num_levels - 2], values[num_levels - 1], p);
      entry.reference_kind = ReferenceKind::self_referenced;
    }

    entry.rows.resize(num_levels);
    for (std::size_t l = 0; l < num_levels; ++l) {
      TableRow& row = entry.rows[l];
      row.level_n = seq.levels[l].n;
      row.h = seq.levels[l].h;
      row.lambda_h = values[l];
      row.err_raw = std::abs(values[l] - entry.reference);
      if (l > 0) {
        row.lambda_extrap = richardson(values[l - 1], values[l], p);
        row.err_extrap = std::abs(*row.lambda_extrap - entry.reference);
      }
    }
    const auto raw_orders = observed_order(detail::column(entry.rows, 0, &TableRow::err_raw));
    for (std::size_t l = 1; l < num_levels; ++l) entry.rows[l].order_raw = raw_orders[l - 1];
    if (num_levels >= 3) {
      const auto ex_orders = observed_order(detail::column(entry.rows, 1, &TableRow::err_extrap));
      for (std::size_t l = 2; l < num_levels; ++l) entry.rows[l].order_extrap = ex_orders[l - 2];
    }
    table.entries.push_back(std::move(entry));
  }
  return table;
}

}  // namespace rtmix
