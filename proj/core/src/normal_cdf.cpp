#include "skewar/normal_cdf.hpp"

#include "skewar/errors.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/erf.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

namespace skewar {
namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

double std_normal_quantile(double p) {
  if (p <= 0.0) return -std::numeric_limits<double>::infinity();
  if (p >= 1.0) return std::numeric_limits<double>::infinity();
  return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

// Genz-style separation of variables: X = L y with y standard normal.
class SovIntegrand {
 public:
  SovIntegrand(const Vector& upper, const Matrix& chol) : b_(upper), L_(chol), y_(upper.size()) {}

  double integrate_from(Eigen::Index level) {
    const double e = conditional_cdf(level);
    if (level + 1 == b_.size() || e == 0.0) {
      return e;
    }
    auto inner = [this, level, e](double w) {
      y_[level] = std_normal_quantile(w * e);
      if (!std::isfinite(y_[level])) {
        return 0.0;
      }
      return integrate_from(level + 1);
    };
    double error = 0.0;
    const double value =
        boost::math::quadrature::gauss_kronrod<double, 21>::integrate(inner, 0.0, 1.0, 12, 1e-11, &error);
    return e * value;
  }

 private:
  double conditional_cdf(Eigen::Index i) const {
    double t = b_[i];
    for (Eigen::Index j = 0; j < i; ++j) t -= L_(i, j) * y_[j];
    return std_normal_cdf(t / L_(i, i));
  }

  const Vector& b_;
  const Matrix& L_;
  Vector y_;
};

}  // namespace

double std_normal_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double std_normal_cdf(double x) { return 0.5 * std::erfc(-x * kInvSqrt2); }

double log_std_normal_cdf(double x) {
  if (x > -35.0) {
    return std::log(std_normal_cdf(x));
  }
  // Mills-ratio asymptotic series for the far lower tail.
  const double x2 = x * x;
  const double series = 1.0 - 1.0 / x2 + 3.0 / (x2 * x2) - 15.0 / (x2 * x2 * x2);
  return -0.5 * x2 - std::log(-x) - 0.5 * std::log(2.0 * std::numbers::pi) + std::log(series);
}

double bivariate_normal_cdf(double h, double k, double rho) {
  // Genz BVNU evaluates P(X > dh, Y > dk); P(X <= h, Y <= k) = BVNU(-h, -k).
  const double inf = std::numeric_limits<double>::infinity();
  const double dh = -h;
  const double dk = -k;
  if (dh == inf || dk == inf) return 0.0;
  if (dh == -inf) return dk == -inf ? 1.0 : std_normal_cdf(-dk);
  if (dk == -inf) return std_normal_cdf(-dh);
  if (rho == 0.0) return std_normal_cdf(-dh) * std_normal_cdf(-dk);

  static constexpr std::array<double, 3> w6{0.1713244923791705, 0.3607615730481384, 0.4679139345726904};
  static constexpr std::array<double, 3> x6{0.9324695142031522, 0.6612093864662647, 0.2386191860831970};
  static constexpr std::array<double, 6> w12{0.04717533638651177, 0.1069393259953183, 0.1600783285433464,
                                             0.2031674267230659,  0.2334925365383547, 0.2491470458134029};
  static constexpr std::array<double, 6> x12{0.9815606342467191, 0.9041172563704750, 0.7699026741943050,
                                             0.5873179542866171, 0.3678314989981802, 0.1252334085114692};
  static constexpr std::array<double, 10> w20{0.01761400713915212, 0.04060142980038694, 0.06267204833410906,
                                              0.08327674157670475, 0.1019301198172404,  0.1181945319615184,
                                              0.1316886384491766,  0.1420961093183821,  0.1491729864726037,
                                              0.1527533871307259};
  static constexpr std::array<double, 10> x20{0.9931285991850949, 0.9639719272779138, 0.9122344282513259,
                                              0.8391169718222188, 0.7463319064601508, 0.6360536807265150,
                                              0.5108670019508271, 0.3737060887154196, 0.2277858511416451,
                                              0.07652652113349733};

  const double* w = nullptr;
  const double* x = nullptr;
  int ng = 0;
  const double ar = std::abs(rho);
  if (ar < 0.3) {
    w = w6.data(), x = x6.data(), ng = 3;
  } else if (ar < 0.75) {
    w = w12.data(), x = x12.data(), ng = 6;
  } else {
    w = w20.data(), x = x20.data(), ng = 10;
  }

  const double tp = 2.0 * std::numbers::pi;
  double hh = dh;
  double kk = dk;
  double hk = hh * kk;
  double bvn = 0.0;

  if (ar < 0.925) {
    const double hs = 0.5 * (hh * hh + kk * kk);
    const double asr = 0.5 * std::asin(rho);
    for (int i = 0; i < ng; ++i) {
      for (const double node : {1.0 - x[i], 1.0 + x[i]}) {
        const double sn = std::sin(asr * node);
        bvn += w[i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
      }
    }
    bvn = bvn * asr / tp + std_normal_cdf(-hh) * std_normal_cdf(-kk);
  } else {
    if (rho < 0.0) {
      kk = -kk;
      hk = -hk;
    }
    if (ar < 1.0) {
      const double as = 1.0 - rho * rho;
      double a = std::sqrt(as);
      const double bs = (hh - kk) * (hh - kk);
      const double c = (4.0 - hk) / 8.0;
      const double d = (12.0 - hk) / 80.0;
      double asr = -0.5 * (bs / as + hk);
      if (asr > -100.0) {
        bvn = a * std::exp(asr) * (1.0 - c * (bs - as) * (1.0 - d * bs) / 3.0 + c * d * as * as);
      }
      if (hk > -100.0) {
        const double b = std::sqrt(bs);
        const double sp = std::sqrt(tp) * std_normal_cdf(-b / a);
        bvn -= std::exp(-0.5 * hk) * sp * b * (1.0 - c * bs * (1.0 - d * bs) / 3.0);
      }
      a *= 0.5;
      double sum = 0.0;
      for (int i = 0; i < ng; ++i) {
        for (const double node : {1.0 - x[i], 1.0 + x[i]}) {
          const double xs = (a * node) * (a * node);
          const double asr_i = -0.5 * (bs / xs + hk);
          if (asr_i > -100.0) {
            const double sp = 1.0 + c * xs * (1.0 + 5.0 * d * xs);
            const double rs = std::sqrt(1.0 - xs);
            const double ep = std::exp(-0.5 * hk * xs / ((1.0 + rs) * (1.0 + rs))) / rs;
            sum += w[i] * std::exp(asr_i) * (sp - ep);
          }
        }
      }
      bvn = (a * sum - bvn) / tp;
    }
    if (rho > 0.0) {
      bvn += std_normal_cdf(-std::max(hh, kk));
    } else if (hh >= kk) {
      bvn = -bvn;
    } else {
      const double l = hh < 0.0 ? std_normal_cdf(kk) - std_normal_cdf(hh)
                                : std_normal_cdf(-hh) - std_normal_cdf(-kk);
      bvn = l - bvn;
    }
  }
  return std::clamp(bvn, 0.0, 1.0);
}

double mvn_cdf(const Vector& upper, const Matrix& cov) {
  const Eigen::Index n = upper.size();
  if (n == 0 || cov.rows() != n || cov.cols() != n) {
    throw ValidationError("mvn_cdf: dimension mismatch");
  }
  if (n == 1) {
    if (!(cov(0, 0) > 0.0)) throw ValidationError("mvn_cdf: variance must be positive");
    return std_normal_cdf(upper[0] / std::sqrt(cov(0, 0)));
  }
  if (n == 2) {
    const double s1 = std::sqrt(cov(0, 0));
    const double s2 = std::sqrt(cov(1, 1));
    if (!(s1 > 0.0) || !(s2 > 0.0)) throw ValidationError("mvn_cdf: variance must be positive");
    const double rho = std::clamp(cov(0, 1) / (s1 * s2), -1.0, 1.0);
    return bivariate_normal_cdf(upper[0] / s1, upper[1] / s2, rho);
  }
  Eigen::LLT<Matrix> llt(symmetrized(cov));
  if (llt.info() != Eigen::Success) {
    throw ValidationError("mvn_cdf: covariance must be positive definite");
  }
  const Matrix L = llt.matrixL();
  SovIntegrand integrand(upper, L);
  return std::clamp(integrand.integrate_from(0), 0.0, 1.0);
}

}  // namespace skewar
