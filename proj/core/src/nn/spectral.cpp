#include "comets/nn/spectral.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Core>
#include <Eigen/SVD>

#include "comets/error.hpp"

namespace comets::nn {
namespace {

constexpr double kMinSigma = 1e-12;

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using CMapM = Eigen::Map<const RowMat>;

void normalize(Eigen::Ref<Eigen::VectorXd> x) {
    const double n = x.norm();
    if (n > 0.0) x /= n;
}

}  // namespace

double power_iteration(const Tensor& w, std::vector<double>& u, std::vector<double>& v,
                       std::size_t iterations) {
    if (w.rank() != 2) throw ShapeError("spectral_normalize", "[K, N]", shape_str(w.shape()));
    const auto k = static_cast<Eigen::Index>(w.dim(0)), n = static_cast<Eigen::Index>(w.dim(1));
    if (u.size() != w.dim(0)) {
        throw ShapeError("spectral_normalize u", "[" + std::to_string(k) + "]",
                         "[" + std::to_string(u.size()) + "]");
    }
    CMapM wm(w.data(), k, n);
    Eigen::Map<Eigen::VectorXd> um(u.data(), k);
    v.assign(static_cast<std::size_t>(n), 0.0);
    Eigen::Map<Eigen::VectorXd> vm(v.data(), n);
    vm.noalias() = wm.transpose() * um;
    normalize(vm);
    for (std::size_t i = 1; i < std::max<std::size_t>(iterations, 1); ++i) {
        um.noalias() = wm * vm;
        normalize(um);
        vm.noalias() = wm.transpose() * um;
        normalize(vm);
    }
    um.noalias() = wm * vm;
    const double sigma = um.norm();
    normalize(um);
    return std::max(sigma, kMinSigma);
}

Var spectral_normalize(const Var& w, std::vector<double>& u, std::size_t iterations, bool persist) {
    std::vector<double> uu = u, vv;
    const double sigma = power_iteration(w.value(), uu, vv, iterations);
    if (persist) u = uu;
    Tensor out = w.value();
    for (auto& x : out.storage()) x /= sigma;
    return make_op(std::move(out), {w}, [sigma, uu = std::move(uu), vv = std::move(vv)](Node& n) {
        const std::size_t rows = uu.size(), cols = vv.size();
        double inner = 0.0;
        for (std::size_t i = 0; i < n.grad.size(); ++i) inner += n.grad[i] * n.value[i];
        auto& g = n.parents[0]->grad_buffer();
        for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t c = 0; c < cols; ++c) {
                const std::size_t i = r * cols + c;
                g[i] += (n.grad[i] - inner * uu[r] * vv[c]) / sigma;
            }
    });
}

double operator_norm(const Tensor& w) {
    if (w.rank() != 2) throw ShapeError("operator_norm", "[K, N]", shape_str(w.shape()));
    CMapM wm(w.data(), static_cast<Eigen::Index>(w.dim(0)), static_cast<Eigen::Index>(w.dim(1)));
    Eigen::BDCSVD<Eigen::MatrixXd> svd(wm);
    const auto& s = svd.singularValues();
    return s.size() ? s(0) : 0.0;
}

}  // namespace comets::nn
