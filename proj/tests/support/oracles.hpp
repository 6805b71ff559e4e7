#pragma once

// Independent reference computations for the tests: finite differences,
// closed-form measures and an SVD pseudo-inverse. Nothing here calls the
// kernels under test.

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "formfind/model.hpp"

namespace formfind::testing {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}
    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
    Vec3 point(double range = 1.0) { return {uniform(-range, range), uniform(-range, range), uniform(-range, range)}; }
    Eigen::VectorXd vector(int n, double range = 1.0);
    Eigen::MatrixXd matrix(int rows, int cols, double range = 1.0);
    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
};

using ScalarFn = std::function<double(const Eigen::VectorXd&)>;

/// Fourth-order central differences with step h * max(1, |x_i|).
Eigen::VectorXd fd_gradient(const ScalarFn& f, const Eigen::VectorXd& x, double h = 1e-4);

/// ||a - b|| / max(||a||, ||b||), zero when both vanish.
double rel_err(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

Eigen::VectorXd pack(const std::vector<Vec3>& points);
std::vector<Vec3> unpack(const Eigen::VectorXd& v);

double length_of(const Vec3& p, const Vec3& q);
double area_of(const Vec3& p, const Vec3& q, const Vec3& r);
double volume_of(const Vec3& p, const Vec3& q, const Vec3& r, const Vec3& s);
double measure_of(const std::vector<Vec3>& points);

/// (p_i - p_{i+1}) . (p_j - p_{j+1}).
double metric_entry(const std::vector<Vec3>& points, int i, int j);

/// Gradient of the unsigned volume of a tetrahedron, node by node (3x4).
Eigen::Matrix<double, 3, 4> volume_gradient(const std::vector<Vec3>& points);

/// Random simplex of the given kind with shape quality (measure divided by
/// longest edge^N) at least `quality`.
std::vector<Vec3> random_simplex(Rng& rng, ElementKind kind, double quality = 0.02);

/// Moore-Penrose pseudo-inverse by SVD.
Eigen::MatrixXd pinv_svd(const Eigen::MatrixXd& m);

/// One-element model over `points` (all nodes free, ids 1..n).
Model single_element_model(ElementKind kind, const std::vector<Vec3>& points, ElementRole role);

}  // namespace formfind::testing
