#include "superdyn/hydrogen.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "superdyn/errors.hpp"

namespace superdyn {

void HydrogenState::validate() const {
  if (n < 1 || n > 3) raise(ErrorKind::InvalidArgument, "bundled orbitals cover 1 <= n <= 3");
  if (l < 0 || l >= n) raise(ErrorKind::InvalidArgument, "orbital needs 0 <= l < n");
  if (std::abs(m) > l) raise(ErrorKind::InvalidArgument, "orbital needs |m| <= l");
}

std::string HydrogenState::label() const {
  static const char letters[] = {'s', 'p', 'd'};
  std::string out = std::to_string(n) + letters[l];
  if (l > 0) out += (m > 0 ? "+" : "") + std::to_string(m);
  return out;
}

HydrogenState parse_hydrogen_state(const std::string& text) {
  if (text.size() < 2 || !std::isdigit(static_cast<unsigned char>(text[0]))) {
    raise(ErrorKind::ParseError, "bad orbital label '" + text + "'");
  }
  HydrogenState s;
  s.n = text[0] - '0';
  switch (text[1]) {
    case 's': s.l = 0; break;
    case 'p': s.l = 1; break;
    case 'd': s.l = 2; break;
    default: raise(ErrorKind::ParseError, "bad orbital letter in '" + text + "'");
  }
  if (text.size() > 2) {
    try {
      std::size_t used = 0;
      s.m = std::stoi(text.substr(2), &used);
      if (used != text.size() - 2) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      raise(ErrorKind::ParseError, "bad magnetic quantum number in '" + text + "'");
    }
  }
  s.validate();
  return s;
}

double hydrogen_radial(int n, int l, double r) {
  switch (n * 10 + l) {
    case 10: return 2.0 * std::exp(-r);
    case 20: return (1.0 / std::sqrt(2.0)) * (1.0 - 0.5 * r) * std::exp(-0.5 * r);
    case 21: return (1.0 / (2.0 * std::sqrt(6.0))) * r * std::exp(-0.5 * r);
    case 30:
      return (2.0 / (3.0 * std::sqrt(3.0))) * (1.0 - 2.0 * r / 3.0 + 2.0 * r * r / 27.0) *
             std::exp(-r / 3.0);
    case 31:
      return (8.0 / (27.0 * std::sqrt(6.0))) * r * (1.0 - r / 6.0) * std::exp(-r / 3.0);
    case 32: return (4.0 / (81.0 * std::sqrt(30.0))) * r * r * std::exp(-r / 3.0);
    default: raise(ErrorKind::InvalidArgument, "no bundled radial function for this (n, l)");
  }
}

cplx spherical_harmonic(int l, int m, const Vec3& v) {
  const double r = v.norm();
  const double ct = r > 0.0 ? v.z() / r : 1.0;
  // sinθ e^{iφ}
  const cplx se = r > 0.0 ? cplx(v.x(), v.y()) / r : cplx(0.0);
  const double pi4 = 4.0 * kPi;
  auto raised = [](cplx z, int k) {
    cplx out = 1.0;
    for (int i = 0; i < k; ++i) out *= z;
    return out;
  };
  const int am = std::abs(m);
  // Y_{l,-m} = (-1)^m conj(Y_{l,m})
  auto positive = [&]() -> cplx {
    switch (l * 10 + am) {
      case 0: return 1.0 / std::sqrt(pi4);
      case 10: return std::sqrt(3.0 / pi4) * ct;
      case 11: return -std::sqrt(3.0 / (8.0 * kPi)) * se;
      case 20: return std::sqrt(5.0 / (16.0 * kPi)) * (3.0 * ct * ct - 1.0);
      case 21: return -std::sqrt(15.0 / (8.0 * kPi)) * ct * se;
      case 22: return std::sqrt(15.0 / (32.0 * kPi)) * raised(se, 2);
      default: raise(ErrorKind::InvalidArgument, "no bundled spherical harmonic for this (l, m)");
    }
  };
  const cplx y = positive();
  if (m >= 0) return y;
  return (am % 2 == 0 ? 1.0 : -1.0) * std::conj(y);
}

cplx hydrogen_wavefunction(const HydrogenState& s, const Vec3& r) {
  return hydrogen_radial(s.n, s.l, r.norm()) * spherical_harmonic(s.l, s.m, r);
}

namespace {

double log_gamma_pdf(double r, double shape, double rate) {
  return shape * std::log(rate) + (shape - 1.0) * std::log(r) - rate * r - std::lgamma(shape);
}

Vec3 random_direction(std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Vec3 v;
  do {
    v = Vec3(normal(rng), normal(rng), normal(rng));
  } while (v.squaredNorm() == 0.0);
  return v.normalized();
}

struct BlockSums {
  double re = 0.0, im = 0.0, re2 = 0.0, im2 = 0.0;
  long long n = 0, excluded = 0;
};

/// Mixture proposal over (Q, q) ∈ ℝ⁶.
struct Proposal {
  double shape_Q, rate_Q, shape_q, rate_q;  // orbital-matched radial Gammas
  double rate_u, rate_w;                    // (Q+q, Q-q) component
  double alpha = 0.5;

  void sample(std::mt19937_64& rng, Vec3& Q, Vec3& q) const {
    std::uniform_real_distribution<double> uniform;
    if (uniform(rng) < alpha) {
      std::gamma_distribution<double> rq(shape_Q, 1.0 / rate_Q), rk(shape_q, 1.0 / rate_q);
      Q = rq(rng) * random_direction(rng);
      q = rk(rng) * random_direction(rng);
    } else {
      std::exponential_distribution<double> ru(rate_u);
      std::gamma_distribution<double> rw(3.0, 1.0 / rate_w);
      const Vec3 u = ru(rng) * random_direction(rng);
      const Vec3 w = rw(rng) * random_direction(rng);
      Q = 0.5 * (u + w);
      q = 0.5 * (u - w);
    }
  }

  double density(const Vec3& Q, const Vec3& q) const {
    const double pi4 = 4.0 * kPi;
    auto radial = [&](double r, double shape, double rate) {
      return std::exp(log_gamma_pdf(r, shape, rate)) / (pi4 * r * r);
    };
    const double rQ = Q.norm(), rq = q.norm();
    const double s = (Q + q).norm(), t = (Q - q).norm();
    const double pa = radial(rQ, shape_Q, rate_Q) * radial(rq, shape_q, rate_q);
    const double pu = rate_u * std::exp(-rate_u * s) / (pi4 * s * s);
    const double pw = rate_w * rate_w * rate_w * std::exp(-rate_w * t) / (8.0 * kPi);
    return alpha * pa + (1.0 - alpha) * 8.0 * pu * pw;
  }
};

}  // namespace

McEstimate coulomb_superop_element(const HydrogenState& a, const HydrogenState& b,
                                   const HydrogenState& c, const HydrogenState& d, double e2,
                                   const McOptions& options) {
  for (const auto* s : {&a, &b, &c, &d}) s->validate();
  if (!(e2 > 0.0)) raise(ErrorKind::InvalidArgument, "e^2 must be positive");
  if (options.samples < 1 || options.block_size < 1) {
    raise(ErrorKind::InvalidArgument, "Monte Carlo needs a positive sample budget");
  }

  Proposal prop;
  prop.shape_Q = a.l + c.l + 3.0;
  prop.rate_Q = 1.0 / a.n + 1.0 / c.n;
  prop.shape_q = b.l + d.l + 3.0;
  prop.rate_q = 1.0 / b.n + 1.0 / d.n;
  prop.rate_u = 0.5 * std::min(prop.rate_Q, prop.rate_q);
  prop.rate_w = prop.rate_u;

  const double eps = options.eps_reg;
  auto run_block = [&](long long block, long long count) {
    BlockSums sums;
    auto rng = make_stream(options.seed, static_cast<std::uint64_t>(block));
    Vec3 Q, q;
    for (long long i = 0; i < count; ++i) {
      prop.sample(rng, Q, q);
      ++sums.n;
      const double rQ = Q.norm(), rq = q.norm(), rs = (Q + q).norm();
      if (rQ <= eps || rq <= eps || rs <= eps) {
        ++sums.excluded;
        continue;
      }
      const double e = 4.0 * e2 * (Q.squaredNorm() - q.squaredNorm()) / (rs * rs * rs) + e2 / rQ -
                       e2 / rq;
      const cplx f = std::conj(hydrogen_wavefunction(a, Q)) * hydrogen_wavefunction(b, q) * e *
                     hydrogen_wavefunction(c, Q) * std::conj(hydrogen_wavefunction(d, q));
      const cplx ratio = f / prop.density(Q, q);
      sums.re += ratio.real();
      sums.im += ratio.imag();
      sums.re2 += ratio.real() * ratio.real();
      sums.im2 += ratio.imag() * ratio.imag();
    }
    return sums;
  };

  const long long n_blocks = (options.samples + options.block_size - 1) / options.block_size;
  std::vector<BlockSums> results(static_cast<std::size_t>(n_blocks));
  auto block_count = [&](long long blk) {
    return std::min(options.block_size, options.samples - blk * options.block_size);
  };
  const int threads = std::max(1, std::min<int>(options.threads, static_cast<int>(n_blocks)));
  if (threads == 1) {
    for (long long blk = 0; blk < n_blocks; ++blk) results[blk] = run_block(blk, block_count(blk));
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        for (long long blk = t; blk < n_blocks; blk += threads) {
          results[blk] = run_block(blk, block_count(blk));
        }
      });
    }
    for (auto& th : pool) th.join();
  }

  BlockSums total;
  for (const auto& r : results) {
    total.re += r.re;
    total.im += r.im;
    total.re2 += r.re2;
    total.im2 += r.im2;
    total.n += r.n;
    total.excluded += r.excluded;
  }
  const double n = static_cast<double>(total.n);
  McEstimate est;
  est.value = cplx(total.re / n, total.im / n);
  const double var_re = std::max(0.0, total.re2 / n - std::norm(total.re / n));
  const double var_im = std::max(0.0, total.im2 / n - std::norm(total.im / n));
  est.std_error = std::sqrt((var_re + var_im) / std::max(1.0, n - 1.0));
  est.samples = total.n;
  est.excluded = total.excluded;
  if (est.std_error > options.tolerance) {
    raise(ErrorKind::NotConverged, "Monte Carlo standard error " + std::to_string(est.std_error) +
                                       " exceeds tolerance " + std::to_string(options.tolerance));
  }
  return est;
}

}  // namespace superdyn
