#pragma once

// N-level quantum system: stationary energies, transition moments and the
// pairwise transition data derived from them. Atomic units throughout.

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "rabipulse/errors.hpp"

namespace rabipulse {

/// Immutable, validated level structure.
///
/// Invariants: moments are symmetric with zero diagonal, labels are unique,
/// and any coupled pair (mu_ij != 0) is non-degenerate.
class LevelSystem {
 public:
  LevelSystem() = default;

  std::size_t size() const noexcept { return labels_.size(); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  const std::vector<double>& energies() const noexcept { return energies_; }
  const Eigen::MatrixXd& moments() const noexcept { return moments_; }

  double energy(std::size_t i) const { return energies_.at(i); }
  double moment(std::size_t i, std::size_t j) const { return moments_(check(i), check(j)); }
  const std::string& label(std::size_t i) const { return labels_.at(i); }

  /// Index of a level by label; throws ValidationError if unknown.
  std::size_t index_of(const std::string& label) const {
    for (std::size_t i = 0; i < labels_.size(); ++i) {
      if (labels_[i] == label) return i;
    }
    throw ValidationError("unknown level '" + label + "'");
  }

  bool operator==(const LevelSystem& o) const {
    return labels_ == o.labels_ && energies_ == o.energies_ && moments_ == o.moments_;
  }

 private:
  friend LevelSystem build_system(std::vector<std::string>, std::vector<double>, Eigen::MatrixXd);

  std::size_t check(std::size_t i) const {
    if (i >= labels_.size()) throw ValidationError("level index out of range");
    return i;
  }

  std::vector<std::string> labels_;
  std::vector<double> energies_;
  Eigen::MatrixXd moments_;
};

/// Validates and assembles a LevelSystem.
inline LevelSystem build_system(std::vector<std::string> labels, std::vector<double> energies,
                                Eigen::MatrixXd moments) {
  const auto n = labels.size();
  if (n == 0) throw ValidationError("level system must contain at least one level");
  if (energies.size() != n) {
    throw ValidationError("energies list has " + std::to_string(energies.size()) +
                          " entries, expected " + std::to_string(n));
  }
  if (static_cast<std::size_t>(moments.rows()) != n || static_cast<std::size_t>(moments.cols()) != n) {
    throw ValidationError("moment matrix must be " + std::to_string(n) + "x" + std::to_string(n));
  }
  std::set<std::string> seen;
  for (const auto& l : labels) {
    if (l.empty()) throw ValidationError("empty level label");
    if (!seen.insert(l).second) throw ValidationError("duplicate level label '" + l + "'");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(energies[i])) throw ValidationError("non-finite energy for level '" + labels[i] + "'");
    if (moments(i, i) != 0.0) throw ValidationError("diagonal moment of level '" + labels[i] + "' must be zero");
    for (std::size_t j = i + 1; j < n; ++j) {
      const double mij = moments(i, j);
      if (!std::isfinite(mij) || mij != moments(j, i)) {
        throw ValidationError("moment matrix not symmetric at pair (" + labels[i] + ", " + labels[j] + ")");
      }
      if (mij != 0.0 && energies[i] == energies[j]) {
        throw ValidationError("coupled levels '" + labels[i] + "' and '" + labels[j] + "' are degenerate");
      }
    }
  }
  LevelSystem s;
  s.labels_ = std::move(labels);
  s.energies_ = std::move(energies);
  s.moments_ = std::move(moments);
  return s;
}

/// The two levels between which population is transferred.
struct TargetPair {
  std::size_t alpha = 0;
  std::size_t beta = 1;

  bool operator==(const TargetPair&) const = default;
};

inline TargetPair make_target(const LevelSystem& system, std::size_t alpha, std::size_t beta) {
  if (alpha >= system.size() || beta >= system.size()) throw ValidationError("target level index out of range");
  if (alpha == beta) throw ValidationError("target levels must differ");
  if (system.moment(alpha, beta) == 0.0) {
    throw ValidationError("target levels '" + system.label(alpha) + "' and '" + system.label(beta) +
                          "' are not directly coupled");
  }
  return {alpha, beta};
}

enum class Attachment { alpha, beta };

/// A perturbing level coupled to exactly one of the target levels.
struct PerturberSpec {
  Attachment attached_to = Attachment::beta;
  std::size_t level = 2;

  bool operator==(const PerturberSpec&) const = default;
};

inline std::size_t attached_level(const TargetPair& pair, const PerturberSpec& p) {
  return p.attached_to == Attachment::alpha ? pair.alpha : pair.beta;
}

inline std::size_t other_level(const TargetPair& pair, const PerturberSpec& p) {
  return p.attached_to == Attachment::alpha ? pair.beta : pair.alpha;
}

inline PerturberSpec make_perturber(const LevelSystem& system, const TargetPair& pair, std::size_t level,
                                    Attachment attached_to) {
  if (level >= system.size()) throw ValidationError("perturber level index out of range");
  if (level == pair.alpha || level == pair.beta) throw ValidationError("perturber cannot be a target level");
  PerturberSpec p{attached_to, level};
  const auto host = attached_level(pair, p);
  const auto other = other_level(pair, p);
  if (system.moment(level, host) == 0.0) {
    throw ValidationError("perturber '" + system.label(level) + "' is not coupled to '" + system.label(host) + "'");
  }
  if (system.moment(level, other) != 0.0) {
    throw ValidationError("perturber '" + system.label(level) + "' must not couple to '" + system.label(other) + "'");
  }
  return p;
}

/// Pairwise transition data for levels (i, j).
struct TransitionData {
  double omega = 0.0;  ///< |E_i - E_j|
  int sign = 0;        ///< sign(E_i - E_j); 0 only for uncoupled degenerate pairs
  double moment = 0.0;
  double ratio = 0.0;  ///< mu_ij / mu_alpha_beta
};

inline TransitionData transition(const LevelSystem& system, std::size_t i, std::size_t j, const TargetPair& pair) {
  if (i == j) throw ValidationError("transition requires two distinct levels");
  const double de = system.energy(i) - system.energy(j);
  TransitionData d;
  d.omega = std::abs(de);
  d.sign = de > 0.0 ? 1 : (de < 0.0 ? -1 : 0);
  d.moment = system.moment(i, j);
  d.ratio = d.moment / system.moment(pair.alpha, pair.beta);
  return d;
}

}  // namespace rabipulse
