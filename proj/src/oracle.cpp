#include "qfratio/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "qfratio/errors.hpp"
#include "qfratio/parallel.hpp"
#include "qfratio/quadrature.hpp"
#include "qfratio/saddlepoint.hpp"
#include "qfratio/support.hpp"

namespace qfratio {

namespace {

__extension__ using u128 = unsigned __int128;

constexpr std::uint64_t kMul0 = 0xD2E7470EE14C6C93ULL;
constexpr std::uint64_t kMul1 = 0xCA5A826395121157ULL;
constexpr std::uint64_t kWeyl0 = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kWeyl1 = 0xBB67AE8584CAA73BULL;

// Draws are processed in blocks so the reduction order is fixed.
constexpr std::uint64_t kBlock = 1 << 14;

void mulhilo(std::uint64_t a, std::uint64_t b, std::uint64_t& hi, std::uint64_t& lo) {
  const u128 p = static_cast<u128>(a) * b;
  hi = static_cast<std::uint64_t>(p >> 64);
  lo = static_cast<std::uint64_t>(p);
}

void require_draws(std::uint64_t n_draws) {
  if (n_draws < 1000) throw InvalidInput("Monte Carlo needs at least 1000 draws");
}

std::uint64_t block_count(std::uint64_t n_draws) { return (n_draws + kBlock - 1) / kBlock; }

// Runs fn(first_draw, last_draw, block) over all blocks in parallel.
template <class Fn>
void for_each_block(std::uint64_t n_draws, Fn fn) {
  parallel_for(block_count(n_draws), [&](std::size_t b) {
    const std::uint64_t first = b * kBlock;
    fn(first, std::min(n_draws, first + kBlock), b);
  });
}

}  // namespace

Philox4x64::Counter Philox4x64::generate(Counter ctr, Key key) {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    std::uint64_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, ctr[0], hi0, lo0);
    mulhilo(kMul1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

double CounterStream::to_uniform(std::uint64_t x) {
  return (static_cast<double>(x >> 12) + 0.5) * 0x1.0p-52;
}

void CounterStream::normals(std::uint64_t draw, double* out, int count) const {
  const Philox4x64::Key key{seed_, 0x5153524154494fULL};
  int filled = 0;
  for (std::uint64_t block = 0; filled < count; ++block) {
    const auto bits = Philox4x64::generate({draw, block, 0, 0}, key);
    for (int pair = 0; pair < 2 && filled < count; ++pair) {
      const double u1 = to_uniform(bits[2 * pair]);
      const double u2 = to_uniform(bits[2 * pair + 1]);
      const double radius = std::sqrt(-2.0 * std::log(u1));
      const double angle = 2.0 * std::numbers::pi * u2;
      out[filled++] = radius * std::cos(angle);
      if (filled < count) out[filled++] = radius * std::sin(angle);
    }
  }
}

std::vector<McEstimate> mc_cdf_grid(const QuadFormRatio& ratio, const std::vector<double>& grid,
                                    std::uint64_t n_draws, std::uint64_t seed) {
  require_draws(n_draws);
  const Eigen::Index n = ratio.dim();
  const CounterStream stream(seed);
  std::vector<std::vector<std::uint64_t>> counts(block_count(n_draws),
                                                 std::vector<std::uint64_t>(grid.size(), 0));
  for_each_block(n_draws, [&](std::uint64_t first, std::uint64_t last, std::size_t b) {
    Vector e(n);
    auto& local = counts[b];
    for (std::uint64_t d = first; d < last; ++d) {
      stream.normals(d, e.data(), static_cast<int>(n));
      e += ratio.mu();
      const double value = e.dot(ratio.A() * e) / e.dot(ratio.B() * e);
      for (std::size_t g = 0; g < grid.size(); ++g) {
        if (value <= grid[g]) ++local[g];
      }
    }
  });

  std::vector<McEstimate> out(grid.size());
  const double nd = static_cast<double>(n_draws);
  for (std::size_t g = 0; g < grid.size(); ++g) {
    std::uint64_t hits = 0;
    for (const auto& local : counts) hits += local[g];
    const double p = static_cast<double>(hits) / nd;
    out[g] = {p, std::sqrt(p * (1.0 - p) / nd), n_draws, seed};
  }
  return out;
}

McEstimate mc_cdf(const QuadFormRatio& ratio, double r, std::uint64_t n_draws,
                  std::uint64_t seed) {
  return mc_cdf_grid(ratio, {r}, n_draws, seed).front();
}

namespace {

// Calls visit(x) for every draw x of the combination and sums the
// per-block integer tallies returned by visit in a fixed order.
template <std::size_t K, class Visit>
std::array<std::uint64_t, K> tally_combo(const Chi2Combo& combo, std::uint64_t n_draws,
                                         std::uint64_t seed, Visit visit) {
  require_draws(n_draws);
  int dim = 0;
  for (const Chi2Term& t : combo.terms) dim += t.df;
  const CounterStream stream(seed);
  std::vector<std::array<std::uint64_t, K>> counts(block_count(n_draws));
  for_each_block(n_draws, [&](std::uint64_t first, std::uint64_t last, std::size_t b) {
    std::vector<double> z(static_cast<std::size_t>(dim));
    std::array<std::uint64_t, K> local{};
    for (std::uint64_t d = first; d < last; ++d) {
      stream.normals(d, z.data(), dim);
      double x = 0.0;
      std::size_t k = 0;
      for (const Chi2Term& t : combo.terms) {
        double chi = 0.0;
        for (int j = 0; j < t.df; ++j, ++k) {
          const double v = z[k] + (j == 0 ? std::sqrt(t.noncentrality) : 0.0);
          chi += v * v;
        }
        x += t.weight * chi;
      }
      visit(x, local);
    }
    counts[b] = local;
  });
  std::array<std::uint64_t, K> total{};
  for (const auto& c : counts) {
    for (std::size_t i = 0; i < K; ++i) total[i] += c[i];
  }
  return total;
}

}  // namespace

McEstimate mc_cdf_combo(const Chi2Combo& combo, double x, std::uint64_t n_draws,
                        std::uint64_t seed) {
  const auto hits = tally_combo<1>(combo, n_draws, seed, [x](double v, auto& c) {
    if (v <= x) ++c[0];
  });
  const double nd = static_cast<double>(n_draws);
  const double p = static_cast<double>(hits[0]) / nd;
  return {p, std::sqrt(p * (1.0 - p) / nd), n_draws, seed};
}

McEstimate mc_density_at_zero(const Chi2Combo& combo, double h, std::uint64_t n_draws,
                              std::uint64_t seed) {
  if (!(h > 0.0)) throw InvalidInput("kernel half-width must be > 0");
  const auto hits = tally_combo<2>(combo, n_draws, seed, [h](double v, auto& c) {
    const double a = std::abs(v);
    if (a < 0.5 * h) {
      ++c[0];
    } else if (a < h) {
      ++c[1];
    }
  });
  const double inner = static_cast<double>(hits[0]);
  const double outer = static_cast<double>(hits[1]);
  // Per-draw score 7/(6h) inside h/2, -1/(6h) between h/2 and h.
  const double nd = static_cast<double>(n_draws);
  const double mean = (7.0 * inner - outer) / (6.0 * h * nd);
  const double second = (49.0 * inner + outer) / (36.0 * h * h * nd);
  return {mean, std::sqrt(std::max(0.0, second - mean * mean) / nd), n_draws, seed};
}

Chi2Combo combo_at(const QuadFormRatio& ratio, double r) {
  const SpectrumAtR sp = spectrum_at(ratio, r);
  const double floor = eigenvalue_floor(sp.lambdas);
  Chi2Combo combo;
  for (Eigen::Index i = 0; i < sp.lambdas.size(); ++i) {
    if (std::abs(sp.lambdas(i)) > floor) {
      combo.terms.push_back({sp.lambdas(i), 1, sp.nu(i) * sp.nu(i)});
    }
  }
  if (combo.terms.empty()) {
    throw UnsupportedInstance("pencil vanishes at r; the ratio is degenerate");
  }
  return combo;
}

TailPair imhof_tails_of_R(const QuadFormRatio& ratio, double r, double tol) {
  if (std::isnan(r)) throw InvalidInput("r is NaN");
  if (std::isinf(r)) return r > 0 ? TailPair{1.0, 0.0} : TailPair{0.0, 1.0};
  const Chi2Combo combo = combo_at(ratio, r);
  bool has_pos = false;
  bool has_neg = false;
  for (const Chi2Term& t : combo.terms) {
    has_pos = has_pos || t.weight > 0.0;
    has_neg = has_neg || t.weight < 0.0;
  }
  if (!has_neg) return {0.0, 1.0};
  if (!has_pos) return {1.0, 0.0};
  return imhof_tails(combo, 0.0, tol);
}

double imhof_cdf_of_R(const QuadFormRatio& ratio, double r, double tol) {
  return imhof_tails_of_R(ratio, r, tol).lower;
}

double imhof_density_of_R(const QuadFormRatio& ratio, double r) {
  const SupportInfo info = support(ratio);
  if (!(r > info.l && r < info.r_bar)) return 0.0;
  // Keep the stencil well inside the support: near an edge the density
  // behaves like a power of the distance and the difference bias grows.
  const double room = std::min(r - info.l, info.r_bar - r);
  const double h = std::min(1e-4 * std::max(1.0, std::abs(r)), room / 16.0);
  const auto difference = [&](double step) {
    const TailPair hi = imhof_tails_of_R(ratio, r + step, 1e-12);
    const TailPair lo = imhof_tails_of_R(ratio, r - step, 1e-12);
    // Difference whichever tail is small so the result keeps its relative
    // accuracy near an edge.
    if (hi.lower <= 0.5) return (hi.lower - lo.lower) / (2.0 * step);
    return (lo.upper - hi.upper) / (2.0 * step);
  };
  return (4.0 * difference(0.5 * h) - difference(h)) / 3.0;
}

double exact_density_n2(double mu1, double mu2, double r) {
  const double d = 1.0 + r * r;
  const double m = mu1 + r * mu2;
  const double theta = std::erf(m / std::sqrt(2.0 * d));
  const double lam = std::exp(-0.5 * (mu1 * r - mu2) * (mu1 * r - mu2) / d);
  return std::exp(-0.5 * (mu1 * mu1 + mu2 * mu2)) / (std::numbers::pi * d) +
         lam * theta * m / (d * std::sqrt(2.0 * std::numbers::pi * d));
}

TailPair exact_cdf_n2(double mu1, double mu2, double r, double rel_tol) {
  if (std::isnan(r)) throw InvalidInput("r is NaN");
  if (std::isinf(r)) return r > 0 ? TailPair{1.0, 0.0} : TailPair{0.0, 1.0};
  const QuadOptions opt{rel_tol, 0.0, 8000};
  const auto f = [&](double x) { return exact_density_n2(mu1, mu2, x); };
  // Tails beyond |x| = c via x = -+1/u.
  const auto left_tail = [&](double c) {
    return integrate([&](double u) { return f(-1.0 / u) / (u * u); }, 0.0, 1.0 / c, opt).value;
  };
  const auto right_tail = [&](double c) {
    return integrate([&](double u) { return f(1.0 / u) / (u * u); }, 0.0, 1.0 / c, opt).value;
  };
  TailPair out;
  if (r <= -1.0) {
    out.lower = left_tail(-r);
    out.upper = integrate(f, r, 1.0, opt).value + right_tail(1.0);
  } else if (r >= 1.0) {
    out.upper = right_tail(r);
    out.lower = left_tail(1.0) + integrate(f, -1.0, r, opt).value;
  } else {
    out.lower = left_tail(1.0) + integrate(f, -1.0, r, opt).value;
    out.upper = integrate(f, r, 1.0, opt).value + right_tail(1.0);
  }
  return out;
}

std::optional<std::pair<double, double>> as_n2(const QuadFormRatio& ratio) {
  if (ratio.dim() != 2) return std::nullopt;
  const Matrix& a = ratio.A();
  const Matrix& b = ratio.B();
  const bool layout = a(0, 0) == 0.0 && a(1, 1) == 0.0 && a(0, 1) == 0.5 && b(0, 0) == 1.0 &&
                      b(0, 1) == 0.0 && b(1, 1) == 0.0;
  if (!layout) return std::nullopt;
  return std::make_pair(ratio.mu()(0), ratio.mu()(1));
}

CurvePoint relative_error_point(const QuadFormRatio& ratio, double r) {
  const CdfApprox approx = cdf(ratio, r);
  if (approx.branch == Branch::outside) {
    throw InvalidInput("grid point r = " + std::to_string(r) + " is outside the open support");
  }
  const auto n2 = as_n2(ratio);
  const TailPair exact =
      n2 ? exact_cdf_n2(n2->first, n2->second, r) : imhof_tails_of_R(ratio, r, 1e-12);

  CurvePoint p;
  p.r = r;
  p.s_hat = approx.solution->s_hat;
  p.exact_cdf = exact.lower;
  p.approx_cdf = approx.value;
  p.tail_ratio = p.s_hat <= 0.0 ? exact.lower / approx.value : exact.upper / approx.upper;
  p.approx_pdf = pdf(ratio, r).value;
  p.exact_density_closed_form = n2.has_value();
  p.exact_pdf = n2 ? exact_density_n2(n2->first, n2->second, r) : imhof_density_of_R(ratio, r);
  p.pdf_ratio = p.exact_pdf / p.approx_pdf;
  return p;
}

std::vector<CurvePoint> relative_error_curve(const QuadFormRatio& ratio,
                                             const std::vector<double>& grid) {
  std::vector<CurvePoint> out(grid.size());
  parallel_for(grid.size(), [&](std::size_t i) { out[i] = relative_error_point(ratio, grid[i]); });
  return out;
}

}  // namespace qfratio
