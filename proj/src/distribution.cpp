#include "distdom/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace distdom {

namespace {

double pow10(int decimals) { return std::pow(10.0, decimals); }

std::int64_t merge_key(double x, double scale) {
  return static_cast<std::int64_t>(std::nearbyint(x * scale));
}

bool lex_less(std::span<const double> a, std::span<const double> b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

void check_same_dim(const ReturnDistribution& a, const ReturnDistribution& b,
                    const char* what) {
  if (a.dim() != b.dim()) {
    throw std::invalid_argument(std::string(what) + ": dimension mismatch (" +
                                std::to_string(a.dim()) + " vs " +
                                std::to_string(b.dim()) + ")");
  }
}

}  // namespace

double round_half_even(double x, int decimals) {
  // nearbyint honours the default rounding mode, which is ties-to-even.
  const double scale = pow10(decimals);
  const double r = std::nearbyint(x * scale) / scale;
  return r == 0.0 ? 0.0 : r;  // no negative zero
}

ReturnDistribution::ReturnDistribution(std::size_t dim, std::vector<Atom> atoms,
                                       int merge_decimals)
    : dim_(dim) {
  if (dim == 0) throw std::invalid_argument("distribution: dim must be >= 1");
  if (merge_decimals < 0) {
    throw std::invalid_argument("distribution: merge decimals must be >= 0");
  }
  double total = 0.0;
  for (const auto& atom : atoms) {
    if (atom.value.size() != dim) {
      throw std::invalid_argument("distribution: atom of length " +
                                  std::to_string(atom.value.size()) +
                                  ", expected " + std::to_string(dim));
    }
    if (!std::isfinite(atom.prob) || atom.prob < 0.0) {
      throw std::invalid_argument("distribution: negative or non-finite probability");
    }
    for (double x : atom.value) {
      if (!std::isfinite(x)) {
        throw std::invalid_argument("distribution: non-finite atom coordinate");
      }
    }
    total += atom.prob;
  }
  if (std::abs(total - 1.0) > kMassTolerance) {
    throw std::invalid_argument("distribution: probabilities sum to " +
                                std::to_string(total));
  }
  std::erase_if(atoms, [](const Atom& a) { return a.prob == 0.0; });

  const double scale = pow10(merge_decimals);
  struct Keyed {
    std::vector<std::int64_t> key;
    std::size_t index;
  };
  std::vector<Keyed> keyed;
  keyed.reserve(atoms.size());
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    Keyed k{{}, i};
    k.key.reserve(dim);
    for (double x : atoms[i].value) k.key.push_back(merge_key(x, scale));
    keyed.push_back(std::move(k));
  }
  std::sort(keyed.begin(), keyed.end(), [&](const Keyed& a, const Keyed& b) {
    if (a.key != b.key) return a.key < b.key;
    return lex_less(atoms[a.index].value, atoms[b.index].value);
  });

  std::vector<std::size_t> order;
  std::vector<double> probs;
  for (std::size_t i = 0; i < keyed.size(); ++i) {
    if (i > 0 && keyed[i].key == keyed[i - 1].key) {
      probs.back() += atoms[keyed[i].index].prob;
    } else {
      order.push_back(keyed[i].index);
      probs.push_back(atoms[keyed[i].index].prob);
    }
  }
  // Key order and raw lexicographic order can disagree only for values that
  // straddle a rounding boundary, so re-sort on the raw values.
  std::vector<std::size_t> perm(order.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::sort(perm.begin(), perm.end(), [&](std::size_t a, std::size_t b) {
    return lex_less(atoms[order[a]].value, atoms[order[b]].value);
  });

  double mass = std::accumulate(probs.begin(), probs.end(), 0.0);
  // Leave already-normalised input untouched so that reconstruction from
  // serialised atoms is bit-exact.
  if (std::abs(mass - 1.0) <= 1e-12) mass = 1.0;
  values_.reserve(order.size() * dim);
  probs_.reserve(order.size());
  for (std::size_t p : perm) {
    const auto& v = atoms[order[p]].value;
    values_.insert(values_.end(), v.begin(), v.end());
    probs_.push_back(probs[p] / mass);
  }
}

ReturnDistribution ReturnDistribution::dirac(Vector value) {
  const std::size_t dim = value.size();
  return ReturnDistribution(dim, {Atom{std::move(value), 1.0}});
}

ReturnDistribution ReturnDistribution::zero(std::size_t dim) {
  return dirac(Vector(dim, 0.0));
}

std::vector<Atom> ReturnDistribution::atoms() const {
  std::vector<Atom> out;
  out.reserve(size());
  for (std::size_t i = 0; i < size(); ++i) {
    auto v = value(i);
    out.push_back(Atom{Vector(v.begin(), v.end()), probs_[i]});
  }
  return out;
}

double cdf(const ReturnDistribution& dist, std::span<const double> point) {
  if (point.size() != dist.dim()) {
    throw std::invalid_argument("cdf: point has length " +
                                std::to_string(point.size()) + ", expected " +
                                std::to_string(dist.dim()));
  }
  double total = 0.0;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    auto v = dist.value(i);
    bool below = true;
    for (std::size_t k = 0; k < v.size(); ++k) {
      if (v[k] > point[k]) {
        below = false;
        break;
      }
    }
    if (below) total += dist.prob(i);
  }
  return std::min(total, 1.0);
}

ReturnDistribution marginal(const ReturnDistribution& dist, std::size_t index) {
  if (index >= dist.dim()) {
    throw std::out_of_range("marginal: objective index " +
                            std::to_string(index) + " out of range for dim " +
                            std::to_string(dist.dim()));
  }
  std::vector<Atom> atoms;
  atoms.reserve(dist.size());
  for (std::size_t i = 0; i < dist.size(); ++i) {
    atoms.push_back(Atom{{dist.value(i)[index]}, dist.prob(i)});
  }
  return ReturnDistribution(1, std::move(atoms));
}

Vector expected_value(const ReturnDistribution& dist) {
  Vector out(dist.dim(), 0.0);
  for (std::size_t i = 0; i < dist.size(); ++i) {
    auto v = dist.value(i);
    for (std::size_t k = 0; k < v.size(); ++k) out[k] += dist.prob(i) * v[k];
  }
  return out;
}

ReturnDistribution mix(std::span<const ReturnDistribution> dists,
                       std::span<const double> weights) {
  if (dists.empty()) throw std::invalid_argument("mix: no distributions");
  if (dists.size() != weights.size()) {
    throw std::invalid_argument("mix: weight count does not match distribution count");
  }
  double total = 0.0;
  for (double w : weights) {
    if (!std::isfinite(w) || w < 0.0) {
      throw std::invalid_argument("mix: weights must be nonnegative");
    }
    total += w;
  }
  if (std::abs(total - 1.0) > kMassTolerance) {
    throw std::invalid_argument("mix: weights sum to " + std::to_string(total));
  }
  const std::size_t dim = dists.front().dim();
  std::vector<Atom> atoms;
  for (std::size_t j = 0; j < dists.size(); ++j) {
    check_same_dim(dists.front(), dists[j], "mix");
    if (weights[j] == 0.0) continue;
    for (auto& atom : dists[j].atoms()) {
      atom.prob *= weights[j];
      atoms.push_back(std::move(atom));
    }
  }
  return ReturnDistribution(dim, std::move(atoms));
}

ReturnDistribution convolve(const ReturnDistribution& a,
                            const ReturnDistribution& b, double scale) {
  check_same_dim(a, b, "convolve");
  if (!std::isfinite(scale) || scale < 0.0) {
    throw std::invalid_argument("convolve: scale must be nonnegative");
  }
  const std::size_t dim = a.dim();
  std::vector<Atom> atoms;
  atoms.reserve(a.size() * b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    auto u = a.value(i);
    for (std::size_t j = 0; j < b.size(); ++j) {
      auto v = b.value(j);
      Atom atom{Vector(dim), a.prob(i) * b.prob(j)};
      for (std::size_t k = 0; k < dim; ++k) atom.value[k] = u[k] + scale * v[k];
      atoms.push_back(std::move(atom));
    }
  }
  return ReturnDistribution(dim, std::move(atoms));
}

ReturnDistribution round_to_precision(const ReturnDistribution& dist,
                                      int decimals) {
  if (decimals < 0) {
    throw std::invalid_argument("round_to_precision: decimals must be >= 0");
  }
  auto atoms = dist.atoms();
  for (auto& atom : atoms) {
    for (double& x : atom.value) x = round_half_even(x, decimals);
  }
  // Merging at the rounding precision itself is exact on the rounded values.
  return ReturnDistribution(dist.dim(), std::move(atoms),
                            std::max(decimals, kDefaultPrecision));
}

double js_distance(const ReturnDistribution& a, const ReturnDistribution& b) {
  check_same_dim(a, b, "js_distance");
  // Both supports are sorted lexicographically; merge them.
  double divergence = 0.0;
  auto term = [](double p, double m) { return p > 0.0 ? p * std::log2(p / m) : 0.0; };
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a.size() || j < b.size()) {
    double p = 0.0;
    double q = 0.0;
    if (j == b.size() || (i < a.size() && lex_less(a.value(i), b.value(j)))) {
      p = a.prob(i++);
    } else if (i == a.size() || lex_less(b.value(j), a.value(i))) {
      q = b.prob(j++);
    } else {
      p = a.prob(i++);
      q = b.prob(j++);
    }
    const double m = 0.5 * (p + q);
    divergence += 0.5 * (term(p, m) + term(q, m));
  }
  return std::sqrt(std::clamp(divergence, 0.0, 1.0));
}

GridAxes grid_axes(std::span<const ReturnDistribution> dists) {
  if (dists.empty()) return {};
  const std::size_t dim = dists.front().dim();
  GridAxes axes(dim);
  for (const auto& d : dists) {
    check_same_dim(dists.front(), d, "step_grid");
    for (std::size_t i = 0; i < d.size(); ++i) {
      auto v = d.value(i);
      for (std::size_t k = 0; k < dim; ++k) axes[k].push_back(v[k]);
    }
  }
  for (auto& axis : axes) {
    std::sort(axis.begin(), axis.end());
    axis.erase(std::unique(axis.begin(), axis.end()), axis.end());
  }
  return axes;
}

GridAxes grid_axes(const ReturnDistribution& a, const ReturnDistribution& b) {
  const ReturnDistribution pair[] = {a, b};
  return grid_axes(pair);
}

std::size_t grid_size(const GridAxes& axes) {
  if (axes.empty()) return 0;
  std::size_t n = 1;
  for (const auto& axis : axes) n *= axis.size();
  return n;
}

std::vector<Vector> grid_points(const GridAxes& axes) {
  const std::size_t n = grid_size(axes);
  std::vector<Vector> points;
  points.reserve(n);
  std::vector<std::size_t> idx(axes.size(), 0);
  for (std::size_t c = 0; c < n; ++c) {
    Vector p(axes.size());
    for (std::size_t k = 0; k < axes.size(); ++k) p[k] = axes[k][idx[k]];
    points.push_back(std::move(p));
    for (std::size_t k = axes.size(); k-- > 0;) {
      if (++idx[k] < axes[k].size()) break;
      idx[k] = 0;
    }
  }
  return points;
}

std::vector<Vector> step_grid(std::span<const ReturnDistribution> dists) {
  return grid_points(grid_axes(dists));
}

std::vector<double> cdf_on_grid(const ReturnDistribution& dist,
                                const GridAxes& axes) {
  if (axes.size() != dist.dim()) {
    throw std::invalid_argument("cdf_on_grid: axes do not match dimension");
  }
  const std::size_t dim = axes.size();
  const std::size_t n = grid_size(axes);
  std::vector<double> cells(n, 0.0);
  // strides[k]: distance between neighbouring cells along axis k
  std::vector<std::size_t> strides(dim, 1);
  for (std::size_t k = dim - 1; k-- > 0;) strides[k] = strides[k + 1] * axes[k + 1].size();

  for (std::size_t i = 0; i < dist.size(); ++i) {
    auto v = dist.value(i);
    std::size_t cell = 0;
    bool inside = true;
    for (std::size_t k = 0; k < dim; ++k) {
      // first grid coordinate >= v[k]: the atom counts from there upwards
      auto it = std::lower_bound(axes[k].begin(), axes[k].end(), v[k]);
      if (it == axes[k].end()) {
        inside = false;
        break;
      }
      cell += static_cast<std::size_t>(it - axes[k].begin()) * strides[k];
    }
    if (inside) cells[cell] += dist.prob(i);
  }
  for (std::size_t k = 0; k < dim; ++k) {
    const std::size_t len = axes[k].size();
    const std::size_t stride = strides[k];
    for (std::size_t c = 0; c < n; ++c) {
      const std::size_t pos = (c / stride) % len;
      if (pos > 0) cells[c] += cells[c - stride];
    }
  }
  for (double& x : cells) x = std::min(x, 1.0);
  return cells;
}

}  // namespace distdom
