#include "lgc/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>

#include <Eigen/Cholesky>

#include "lgc/liegroups.hpp"
#include "lgc/loss.hpp"
#include "lgc/posegraph.hpp"
#include "lgc/rng.hpp"

namespace lgc {
namespace {

constexpr double kChartMargin = 0.1;
constexpr double kCorruption = 1e-3;

template <int N>
Eigen::Matrix<double, N, 1> random_ball(CounterRng& rng, double radius) {
  Eigen::Matrix<double, N, 1> v;
  for (int i = 0; i < N; ++i) v(i) = rng.normal();
  const double r = radius * std::pow(rng.uniform(), 1.0 / N);
  return v.normalized() * r;
}

template <int N>
Eigen::Matrix<double, N, N> random_spd(CounterRng& rng) {
  Eigen::Matrix<double, N, N> a;
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < N; ++j) a(i, j) = rng.normal();
  }
  return a * a.transpose() + 0.1 * Eigen::Matrix<double, N, N>::Identity();
}

template <int N>
Eigen::Matrix<double, N, 1> central_gradient(
    const std::function<double(const Eigen::Matrix<double, N, 1>&)>& f,
    const Eigen::Matrix<double, N, 1>& x, double h) {
  Eigen::Matrix<double, N, 1> g;
  for (int i = 0; i < N; ++i) {
    Eigen::Matrix<double, N, 1> d = Eigen::Matrix<double, N, 1>::Zero();
    d(i) = h;
    g(i) = (f(x + d) - f(x - d)) / (2.0 * h);
  }
  return g;
}

bool in_chart(double angle) { return angle < std::numbers::pi - kChartMargin; }

Mat6 corrupted(Mat6 j, bool corrupt) {
  if (corrupt) j += kCorruption * Mat6::Identity();
  return j;
}
Mat3 corrupted(Mat3 j, bool corrupt) {
  if (corrupt) j += kCorruption * Mat3::Identity();
  return j;
}

Twist se3_gradient(const Twist& xi, const Transform& target, const Mat6& cov,
                   GradientMethod m, bool corrupt) {
  const Twist g = se3_residual(xi, target);
  return corrupted(se3_residual_jacobian(xi, target, m), corrupt).transpose() * cov.llt().solve(g);
}

RotVec so3_gradient(const RotVec& phi, const Rotation& target, const Mat3& cov, GradientMethod m,
                    bool corrupt) {
  const RotVec g = so3_residual(phi, target);
  return corrupted(so3_residual_jacobian(phi, target, m), corrupt).transpose() *
         cov.llt().solve(g);
}

void record(SuiteResult& s, double err) {
  ++s.trials;
  s.max_error = std::max(s.max_error, err);
}

SuiteResult se3_fd_suite(const GradcheckOptions& o) {
  SuiteResult s{"se3 Method II vs finite differences", 0, 0, 0.0, 1e-6};
  CounterRng rng(o.seed, 1);
  while (s.trials < o.n) {
    const Twist xi_star = random_ball<6>(rng, 2.0);
    const Twist xi = xi_star + random_ball<6>(rng, 1.0);
    const Transform target = se3_exp(xi_star);
    if (!in_chart(xi.tail<3>().norm()) || !in_chart(se3_residual(xi, target).tail<3>().norm())) {
      ++s.skipped;
      continue;
    }
    const Mat6 cov = random_spd<6>(rng);
    const Twist a = se3_gradient(xi, target, cov, GradientMethod::kMethodII, o.corrupt_jacobian);
    const Twist f = central_gradient<6>(
        [&](const Twist& x) { return se3_loss(x, target, cov); }, xi, o.step);
    record(s, relative_error((a - f).norm(), a.norm(), f.norm()));
  }
  return s;
}

SuiteResult so3_fd_suite(const GradcheckOptions& o) {
  SuiteResult s{"so3 Method II vs finite differences", 0, 0, 0.0, 1e-6};
  CounterRng rng(o.seed, 2);
  while (s.trials < o.n) {
    const RotVec phi_star = random_ball<3>(rng, 2.0);
    const RotVec phi = phi_star + random_ball<3>(rng, 1.0);
    const Rotation target = so3_exp(phi_star);
    if (!in_chart(phi.norm()) || !in_chart(so3_residual(phi, target).norm())) {
      ++s.skipped;
      continue;
    }
    const Mat3 cov = random_spd<3>(rng);
    const RotVec a = so3_gradient(phi, target, cov, GradientMethod::kMethodII, o.corrupt_jacobian);
    const RotVec f = central_gradient<3>(
        [&](const RotVec& x) { return so3_loss(x, target, cov); }, phi, o.step);
    record(s, relative_error((a - f).norm(), a.norm(), f.norm()));
  }
  return s;
}

// Method I linearizes about a small correction, so both methods are checked
// against finite differences only where xi and xi* are both small.
SuiteResult near_minimizer_suite(const GradcheckOptions& o, GradientMethod m, const char* name) {
  SuiteResult s{name, 0, 0, 0.0, 1e-6};
  CounterRng rng(o.seed, m == GradientMethod::kMethodI ? 3 : 4);
  while (s.trials < o.n) {
    const Twist xi_star = random_ball<6>(rng, 1e-3);
    const Twist xi = xi_star + random_ball<6>(rng, 1e-4);
    const Transform target = se3_exp(xi_star);
    const Mat6 cov = random_spd<6>(rng);
    const Twist a = se3_gradient(xi, target, cov, m, o.corrupt_jacobian);
    // Residuals of order 1e-4 need a proportionally smaller step.
    const Twist f = central_gradient<6>(
        [&](const Twist& x) { return se3_loss(x, target, cov); }, xi, o.step * 1e-2);
    record(s, relative_error((a - f).norm(), a.norm(), f.norm()));
  }
  return s;
}

SuiteResult method_agreement_suite(const GradcheckOptions& o) {
  SuiteResult s{"se3 Method I vs Method II, |xi|, |xi*| <= 1e-4", 0, 0, 0.0, 1e-8};
  CounterRng rng(o.seed, 5);
  while (s.trials < o.n) {
    const Twist xi_star = random_ball<6>(rng, 1e-4);
    const Twist xi = random_ball<6>(rng, 1e-4);
    const Transform target = se3_exp(xi_star);
    const Mat6 cov = random_spd<6>(rng);
    const Twist a = se3_gradient(xi, target, cov, GradientMethod::kMethodI, o.corrupt_jacobian);
    const Twist b = se3_gradient(xi, target, cov, GradientMethod::kMethodII, false);
    record(s, relative_error((a - b).norm(), a.norm(), b.norm()));
  }
  return s;
}

SuiteResult left_jacobian_suite(const GradcheckOptions& o, bool se3) {
  SuiteResult s{se3 ? "se3 left Jacobian directional derivative"
                    : "so3 left Jacobian directional derivative",
                0, 0, 0.0, 1e-4};
  CounterRng rng(o.seed, se3 ? 6 : 7);
  while (s.trials < o.n) {
    if (se3) {
      const Twist xi = random_ball<6>(rng, std::numbers::pi - kChartMargin);
      const Twist v = random_ball<6>(rng, 1.0).normalized();
      const Twist fd = se3_log(se3_exp(xi + o.step * v) * se3_exp(xi).inverse()) / o.step;
      const Twist an = corrupted(se3_left_jacobian(xi), o.corrupt_jacobian) * v;
      record(s, relative_error((fd - an).norm(), fd.norm(), an.norm()));
    } else {
      const RotVec phi = random_ball<3>(rng, std::numbers::pi - kChartMargin);
      const RotVec v = random_ball<3>(rng, 1.0).normalized();
      const RotVec fd = so3_log(so3_exp(phi + o.step * v) * so3_exp(phi).inverse()) / o.step;
      const RotVec an = corrupted(so3_left_jacobian(phi), o.corrupt_jacobian) * v;
      record(s, relative_error((fd - an).norm(), fd.norm(), an.norm()));
    }
  }
  return s;
}

Transform random_transform(CounterRng& rng, double rot_radius, double trans_radius) {
  Twist xi;
  xi << random_ball<3>(rng, trans_radius), random_ball<3>(rng, rot_radius);
  return se3_exp(xi);
}

SuiteResult posegraph_suite(const GradcheckOptions& o) {
  SuiteResult s{"pose-graph residual Jacobians vs finite differences", 0, 0, 0.0, 1e-6};
  CounterRng rng(o.seed, 8);
  const int windows = std::max(1, o.n / 10);
  while (s.trials < windows) {
    const Transform t1 = random_transform(rng, 1.0, 5.0);
    const Transform t2 = random_transform(rng, 1.0, 5.0);
    const Transform meas = random_transform(rng, 0.3, 0.5) * t1 * t2.inverse();
    if (!in_chart(pose_error(meas, t1, t2).tail<3>().norm())) {
      ++s.skipped;
      continue;
    }
    const auto jac = pose_error_jacobians(meas, t1, t2);
    Mat6 fd1, fd2;
    for (int i = 0; i < 6; ++i) {
      Twist d = Twist::Zero();
      d(i) = o.step;
      fd1.col(i) = (pose_error(meas, se3_exp(d) * t1, t2) - pose_error(meas, se3_exp(-d) * t1, t2)) /
                   (2.0 * o.step);
      fd2.col(i) = (pose_error(meas, t1, se3_exp(d) * t2) - pose_error(meas, t1, se3_exp(-d) * t2)) /
                   (2.0 * o.step);
    }
    const Mat6 a1 = corrupted(jac.wrt_first, o.corrupt_jacobian);
    const Mat6 a2 = corrupted(jac.wrt_second, o.corrupt_jacobian);
    record(s, std::max(relative_error((a1 - fd1).norm(), a1.norm(), fd1.norm()),
                       relative_error((a2 - fd2).norm(), a2.norm(), fd2.norm())));
  }
  return s;
}

std::vector<AgreementPoint> agreement_sweep(const GradcheckOptions& o) {
  std::vector<AgreementPoint> out;
  CounterRng rng(o.seed, 9);
  for (const double r : {1e-4, 1e-3, 1e-2, 1e-1, 1.0, 2.0}) {
    AgreementPoint p{r, 0.0};
    for (int t = 0; t < 100; ++t) {
      const Twist xi_star = random_ball<6>(rng, r);
      const Twist xi = xi_star + random_ball<6>(rng, 0.1 * r);
      const Transform target = se3_exp(xi_star);
      const Mat6 cov = random_spd<6>(rng);
      const Twist a = se3_gradient(xi, target, cov, GradientMethod::kMethodI, false);
      const Twist b = se3_gradient(xi, target, cov, GradientMethod::kMethodII, false);
      p.max_relative_gap = std::max(p.max_relative_gap,
                                    relative_error((a - b).norm(), a.norm(), b.norm()));
    }
    out.push_back(p);
  }
  return out;
}

}  // namespace

double relative_error(double norm_diff, double norm_a, double norm_b) {
  return norm_diff / std::max({norm_a, norm_b, 1e-12});
}

bool GradcheckReport::passed() const {
  return std::all_of(suites.begin(), suites.end(), [](const SuiteResult& s) { return s.passed(); });
}

std::string GradcheckReport::to_text() const {
  std::string out;
  char buf[256];
  for (const auto& s : suites) {
    std::snprintf(buf, sizeof buf, "%-4s %-52s trials=%-5d max_rel_err=%.3e tol=%.0e\n",
                  s.passed() ? "PASS" : "FAIL", s.name.c_str(), s.trials, s.max_error,
                  s.tolerance);
    out += buf;
  }
  out += "Method I / Method II agreement (targets |xi*| <= r, |xi - xi*| <= r/10):\n";
  for (const auto& p : agreement) {
    std::snprintf(buf, sizeof buf, "  r=%-8.0e max_rel_gap=%.3e\n", p.radius, p.max_relative_gap);
    out += buf;
  }
  return out;
}

GradcheckReport run_gradcheck(const GradcheckOptions& options) {
  GradcheckReport r;
  r.suites.push_back(se3_fd_suite(options));
  r.suites.push_back(so3_fd_suite(options));
  r.suites.push_back(method_agreement_suite(options));
  r.suites.push_back(near_minimizer_suite(options, GradientMethod::kMethodI,
                                          "se3 Method I vs finite differences, small xi*"));
  r.suites.push_back(near_minimizer_suite(options, GradientMethod::kMethodII,
                                          "se3 Method II vs finite differences, small xi*"));
  r.suites.push_back(left_jacobian_suite(options, false));
  r.suites.push_back(left_jacobian_suite(options, true));
  r.suites.push_back(posegraph_suite(options));
  r.agreement = agreement_sweep(options);
  return r;
}

}  // namespace lgc
