#include "comets/nn/ops.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Core>

#include "comets/error.hpp"

namespace comets::nn {
namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapM = Eigen::Map<RowMat>;
using CMapM = Eigen::Map<const RowMat>;
using MapV = Eigen::Map<Eigen::VectorXd>;
using CMapV = Eigen::Map<const Eigen::VectorXd>;

void require_same(const char* where, const Var& a, const Var& b) {
    if (a.shape() != b.shape()) throw ShapeError(where, shape_str(a.shape()), shape_str(b.shape()));
}

Node& parent(Node& n, std::size_t i) { return *n.parents[i]; }

template <typename F, typename DF>
Var unary(const Var& x, F f, DF df) {
    Tensor out(x.shape());
    const auto& in = x.value();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(in[i]);
    return make_op(std::move(out), {x}, [df](Node& n) {
        Node& p = parent(n, 0);
        auto& g = p.grad_buffer();
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i] * df(p.value[i], n.value[i]);
    });
}

double sigmoid_scalar(double v) {
    if (v >= 0) return 1.0 / (1.0 + std::exp(-v));
    const double e = std::exp(v);
    return e / (1.0 + e);
}

// Splits a shape around `axis` into outer * axis * inner.
struct AxisSplit {
    std::size_t outer = 1, len = 1, inner = 1;
};
AxisSplit split_axis(const Shape& s, std::size_t axis) {
    AxisSplit a;
    for (std::size_t i = 0; i < axis; ++i) a.outer *= s[i];
    a.len = s[axis];
    for (std::size_t i = axis + 1; i < s.size(); ++i) a.inner *= s[i];
    return a;
}

void im2col(const double* x, std::size_t batch, std::size_t length, std::size_t cin,
            const ConvGeometry& g, std::size_t lout, double* cols) {
    const std::size_t width = g.kernel * cin;
    for (std::size_t b = 0; b < batch; ++b) {
        for (std::size_t o = 0; o < lout; ++o) {
            double* dst = cols + (b * lout + o) * width;
            for (std::size_t k = 0; k < g.kernel; ++k) {
                const auto pos = static_cast<std::ptrdiff_t>(o * g.stride + k * g.dilation) -
                                 static_cast<std::ptrdiff_t>(g.pad_left);
                if (pos < 0 || pos >= static_cast<std::ptrdiff_t>(length)) {
                    std::fill(dst + k * cin, dst + (k + 1) * cin, 0.0);
                } else {
                    const double* src = x + (b * length + static_cast<std::size_t>(pos)) * cin;
                    std::copy(src, src + cin, dst + k * cin);
                }
            }
        }
    }
}

void col2im_add(const double* cols, std::size_t batch, std::size_t length, std::size_t cin,
                const ConvGeometry& g, std::size_t lout, double* dx) {
    const std::size_t width = g.kernel * cin;
    for (std::size_t b = 0; b < batch; ++b) {
        for (std::size_t o = 0; o < lout; ++o) {
            const double* src = cols + (b * lout + o) * width;
            for (std::size_t k = 0; k < g.kernel; ++k) {
                const auto pos = static_cast<std::ptrdiff_t>(o * g.stride + k * g.dilation) -
                                 static_cast<std::ptrdiff_t>(g.pad_left);
                if (pos < 0 || pos >= static_cast<std::ptrdiff_t>(length)) continue;
                double* dst = dx + (b * length + static_cast<std::size_t>(pos)) * cin;
                for (std::size_t c = 0; c < cin; ++c) dst[c] += src[k * cin + c];
            }
        }
    }
}

bool identity_geometry(const ConvGeometry& g) {
    return g.kernel == 1 && g.stride == 1 && g.pad_left == 0 && g.pad_right == 0;
}

}  // namespace

Var add(const Var& a, const Var& b) {
    require_same("add", a, b);
    Tensor out(a.shape());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.value()[i] + b.value()[i];
    return make_op(std::move(out), {a, b}, [](Node& n) {
        for (std::size_t k = 0; k < 2; ++k) {
            Node& p = parent(n, k);
            if (!p.requires_grad) continue;
            auto& g = p.grad_buffer();
            for (std::size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i];
        }
    });
}

Var sub(const Var& a, const Var& b) {
    require_same("sub", a, b);
    Tensor out(a.shape());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.value()[i] - b.value()[i];
    return make_op(std::move(out), {a, b}, [](Node& n) {
        for (std::size_t k = 0; k < 2; ++k) {
            Node& p = parent(n, k);
            if (!p.requires_grad) continue;
            const double sign = k == 0 ? 1.0 : -1.0;
            auto& g = p.grad_buffer();
            for (std::size_t i = 0; i < g.size(); ++i) g[i] += sign * n.grad[i];
        }
    });
}

Var mul(const Var& a, const Var& b) {
    require_same("mul", a, b);
    Tensor out(a.shape());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.value()[i] * b.value()[i];
    return make_op(std::move(out), {a, b}, [](Node& n) {
        Node& pa = parent(n, 0);
        Node& pb = parent(n, 1);
        if (pa.requires_grad) {
            auto& g = pa.grad_buffer();
            for (std::size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i] * pb.value[i];
        }
        if (pb.requires_grad) {
            auto& g = pb.grad_buffer();
            for (std::size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i] * pa.value[i];
        }
    });
}

Var scale(const Var& a, double s) {
    return unary(a, [s](double v) { return s * v; }, [s](double, double) { return s; });
}

Var leaky_relu(const Var& x, double slope) {
    return unary(
        x, [slope](double v) { return v > 0 ? v : slope * v; },
        [slope](double v, double) { return v > 0 ? 1.0 : slope; });
}

Var silu(const Var& x) {
    return unary(
        x, [](double v) { return v * sigmoid_scalar(v); },
        [](double v, double) {
            const double s = sigmoid_scalar(v);
            return s * (1.0 + v * (1.0 - s));
        });
}

Var tanh(const Var& x) {
    return unary(
        x, [](double v) { return std::tanh(v); }, [](double, double y) { return 1.0 - y * y; });
}

Var sigmoid(const Var& x) {
    return unary(
        x, [](double v) { return sigmoid_scalar(v); }, [](double, double y) { return y * (1.0 - y); });
}

Var tanh_masked(const Var& x, const std::vector<bool>& mask) {
    const std::size_t c = x.shape().back();
    if (mask.size() != c) throw ShapeError("tanh_masked", std::to_string(c) + " mask entries",
                                           std::to_string(mask.size()));
    Tensor out = x.value();
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (mask[i % c]) out[i] = std::tanh(out[i]);
    }
    return make_op(std::move(out), {x}, [mask, c](Node& n) {
        Node& p = parent(n, 0);
        auto& g = p.grad_buffer();
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double y = n.value[i];
            g[i] += mask[i % c] ? n.grad[i] * (1.0 - y * y) : n.grad[i];
        }
    });
}

Var dropout(const Var& x, double p, Rng& rng) {
    if (p <= 0.0) return x;
    if (p >= 1.0) throw SpecificationError("dropout probability must be < 1");
    const double keep = 1.0 - p;
    std::vector<double> mask(x.size());
    for (auto& m : mask) m = uniform01(rng) < keep ? 1.0 / keep : 0.0;
    Tensor out(x.shape());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = x.value()[i] * mask[i];
    return make_op(std::move(out), {x}, [mask = std::move(mask)](Node& n) {
        auto& g = parent(n, 0).grad_buffer();
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i] * mask[i];
    });
}

Var linear(const Var& x, const Var& w, const Var* b) {
    if (w.shape().size() != 2 || x.shape().empty() || x.shape().back() != w.shape()[0]) {
        throw ShapeError("linear", "[..., " + std::to_string(w.shape().at(0)) + "]", shape_str(x.shape()));
    }
    const std::size_t k = w.shape()[0], nout = w.shape()[1];
    const std::size_t m = x.size() / k;
    if (b && (b->shape() != Shape{nout})) throw ShapeError("linear bias", shape_str({nout}), shape_str(b->shape()));
    Shape oshape = x.shape();
    oshape.back() = nout;
    Tensor out(oshape);
    MapM o(out.data(), static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(nout));
    CMapM xm(x.value().data(), static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(k));
    CMapM wm(w.value().data(), static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(nout));
    o.noalias() = xm * wm;
    if (b) o.rowwise() += CMapV(b->value().data(), static_cast<Eigen::Index>(nout)).transpose();

    std::vector<Var> parents{x, w};
    if (b) parents.push_back(*b);
    return make_op(std::move(out), std::move(parents), [m, k, nout](Node& n) {
        const auto M = static_cast<Eigen::Index>(m), K = static_cast<Eigen::Index>(k),
                   N = static_cast<Eigen::Index>(nout);
        CMapM go(n.grad.data(), M, N);
        Node& px = parent(n, 0);
        Node& pw = parent(n, 1);
        if (px.requires_grad) {
            MapM gx(px.grad_buffer().data(), M, K);
            gx.noalias() += go * CMapM(pw.value.data(), K, N).transpose();
        }
        if (pw.requires_grad) {
            MapM gw(pw.grad_buffer().data(), K, N);
            gw.noalias() += CMapM(px.value.data(), M, K).transpose() * go;
        }
        if (n.parents.size() > 2 && parent(n, 2).requires_grad) {
            MapV gb(parent(n, 2).grad_buffer().data(), N);
            gb += go.colwise().sum().transpose();
        }
    });
}

std::size_t ConvGeometry::out_length(std::size_t length) const {
    const std::size_t span = dilation * (kernel - 1) + 1;
    const std::size_t padded = length + pad_left + pad_right;
    if (padded < span) return 0;
    return (padded - span) / stride + 1;
}

Var conv1d(const Var& x, const Var& w, const Var& b, const ConvGeometry& geo) {
    if (x.shape().size() != 3) throw ShapeError("conv1d", "[B, L, Cin]", shape_str(x.shape()));
    const std::size_t batch = x.shape()[0], length = x.shape()[1], cin = x.shape()[2];
    if (w.shape().size() != 2 || w.shape()[0] != geo.kernel * cin) {
        throw ShapeError("conv1d weight", "[" + std::to_string(geo.kernel * cin) + ", Cout]",
                         shape_str(w.shape()));
    }
    const std::size_t cout = w.shape()[1];
    if (b.shape() != Shape{cout}) throw ShapeError("conv1d bias", shape_str({cout}), shape_str(b.shape()));
    const std::size_t lout = geo.out_length(length);
    if (lout == 0) throw ShapeError("conv1d", "input longer than the kernel span", shape_str(x.shape()));

    const std::size_t rows = batch * lout, width = geo.kernel * cin;
    const bool ident = identity_geometry(geo);
    std::vector<double> cols;
    const double* colp = x.value().data();
    if (!ident) {
        cols.resize(rows * width);
        im2col(x.value().data(), batch, length, cin, geo, lout, cols.data());
        colp = cols.data();
    }
    Tensor out({batch, lout, cout});
    MapM o(out.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cout));
    o.noalias() = CMapM(colp, static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(width)) *
                  CMapM(w.value().data(), static_cast<Eigen::Index>(width), static_cast<Eigen::Index>(cout));
    o.rowwise() += CMapV(b.value().data(), static_cast<Eigen::Index>(cout)).transpose();

    return make_op(std::move(out), {x, w, b}, [=](Node& n) {
        const auto R = static_cast<Eigen::Index>(rows), W = static_cast<Eigen::Index>(width),
                   Co = static_cast<Eigen::Index>(cout);
        Node& px = parent(n, 0);
        Node& pw = parent(n, 1);
        Node& pb = parent(n, 2);
        CMapM go(n.grad.data(), R, Co);
        std::vector<double> cols_local;
        const double* cp = px.value.data();
        if (!ident) {
            cols_local.resize(rows * width);
            im2col(px.value.data(), batch, length, cin, geo, lout, cols_local.data());
            cp = cols_local.data();
        }
        if (pw.requires_grad) {
            MapM gw(pw.grad_buffer().data(), W, Co);
            gw.noalias() += CMapM(cp, R, W).transpose() * go;
        }
        if (pb.requires_grad) {
            MapV gb(pb.grad_buffer().data(), Co);
            gb += go.colwise().sum().transpose();
        }
        if (px.requires_grad) {
            if (ident) {
                MapM gx(px.grad_buffer().data(), R, W);
                gx.noalias() += go * CMapM(pw.value.data(), W, Co).transpose();
            } else {
                RowMat gcols = go * CMapM(pw.value.data(), W, Co).transpose();
                col2im_add(gcols.data(), batch, length, cin, geo, lout, px.grad_buffer().data());
            }
        }
    });
}

Var time_linear(const Var& x, const Var& w, const Var& b) {
    if (x.shape().size() != 3) throw ShapeError("time_linear", "[B, P, H]", shape_str(x.shape()));
    const std::size_t batch = x.shape()[0], p = x.shape()[1], h = x.shape()[2];
    if (w.shape().size() != 2 || w.shape()[1] != p) {
        throw ShapeError("time_linear weight", "[F, " + std::to_string(p) + "]", shape_str(w.shape()));
    }
    const std::size_t f = w.shape()[0];
    if (b.shape() != Shape{f}) throw ShapeError("time_linear bias", shape_str({f}), shape_str(b.shape()));
    const auto P = static_cast<Eigen::Index>(p), H = static_cast<Eigen::Index>(h),
               F = static_cast<Eigen::Index>(f);
    Tensor out({batch, f, h});
    CMapM wm(w.value().data(), F, P);
    const CMapV bv(b.value().data(), F);
    for (std::size_t i = 0; i < batch; ++i) {
        MapM o(out.data() + i * f * h, F, H);
        o.noalias() = wm * CMapM(x.value().data() + i * p * h, P, H);
        o.colwise() += bv;
    }
    return make_op(std::move(out), {x, w, b}, [=](Node& n) {
        Node& px = parent(n, 0);
        Node& pw = parent(n, 1);
        Node& pb = parent(n, 2);
        for (std::size_t i = 0; i < batch; ++i) {
            CMapM go(n.grad.data() + i * f * h, F, H);
            if (px.requires_grad) {
                MapM gx(px.grad_buffer().data() + i * p * h, P, H);
                gx.noalias() += CMapM(pw.value.data(), F, P).transpose() * go;
            }
            if (pw.requires_grad) {
                MapM gw(pw.grad_buffer().data(), F, P);
                gw.noalias() += go * CMapM(px.value.data() + i * p * h, P, H).transpose();
            }
            if (pb.requires_grad) {
                MapV gb(pb.grad_buffer().data(), F);
                gb += go.rowwise().sum();
            }
        }
    });
}

Var concat(const std::vector<Var>& parts, std::size_t axis) {
    if (parts.empty()) throw ShapeError("concat", "at least one input", "none");
    const Shape& s0 = parts[0].shape();
    if (axis >= s0.size()) throw ShapeError("concat", "axis < rank", shape_str(s0));
    Shape oshape = s0;
    oshape[axis] = 0;
    for (const auto& p : parts) {
        Shape a = p.shape(), b0 = s0;
        if (a.size() != s0.size()) throw ShapeError("concat", shape_str(s0), shape_str(a));
        a[axis] = b0[axis] = 0;
        if (a != b0) throw ShapeError("concat", shape_str(s0), shape_str(p.shape()));
        oshape[axis] += p.shape()[axis];
    }
    const AxisSplit os = split_axis(oshape, axis);
    Tensor out(oshape);
    std::vector<std::size_t> offsets;
    std::size_t off = 0;
    for (const auto& p : parts) {
        offsets.push_back(off);
        const AxisSplit ps = split_axis(p.shape(), axis);
        const std::size_t chunk = ps.len * ps.inner;
        for (std::size_t o = 0; o < ps.outer; ++o) {
            std::copy_n(p.value().data() + o * chunk, chunk, out.data() + o * os.len * os.inner + off * os.inner);
        }
        off += ps.len;
    }
    return make_op(std::move(out), parts, [os, offsets, axis](Node& n) {
        for (std::size_t k = 0; k < n.parents.size(); ++k) {
            Node& p = parent(n, k);
            if (!p.requires_grad) continue;
            const AxisSplit ps = split_axis(p.value.shape(), axis);
            const std::size_t chunk = ps.len * ps.inner;
            auto& g = p.grad_buffer();
            for (std::size_t o = 0; o < ps.outer; ++o) {
                const double* src = n.grad.data() + o * os.len * os.inner + offsets[k] * os.inner;
                double* dst = g.data() + o * chunk;
                for (std::size_t i = 0; i < chunk; ++i) dst[i] += src[i];
            }
        }
    });
}

Var slice(const Var& x, std::size_t axis, std::size_t start, std::size_t len) {
    if (axis >= x.shape().size() || start + len > x.shape()[axis]) {
        throw ShapeError("slice", "range within axis " + std::to_string(axis), shape_str(x.shape()));
    }
    const AxisSplit s = split_axis(x.shape(), axis);
    Shape oshape = x.shape();
    oshape[axis] = len;
    Tensor out(oshape);
    for (std::size_t o = 0; o < s.outer; ++o) {
        std::copy_n(x.value().data() + (o * s.len + start) * s.inner, len * s.inner,
                    out.data() + o * len * s.inner);
    }
    return make_op(std::move(out), {x}, [s, start, len](Node& n) {
        auto& g = parent(n, 0).grad_buffer();
        for (std::size_t o = 0; o < s.outer; ++o) {
            double* dst = g.data() + (o * s.len + start) * s.inner;
            const double* src = n.grad.data() + o * len * s.inner;
            for (std::size_t i = 0; i < len * s.inner; ++i) dst[i] += src[i];
        }
    });
}

Var reshape(const Var& x, Shape shape) {
    if (numel(shape) != x.size()) throw ShapeError("reshape", shape_str(shape), shape_str(x.shape()));
    Tensor out(std::move(shape), x.value().storage());
    return make_op(std::move(out), {x}, [](Node& n) {
        auto& g = parent(n, 0).grad_buffer();
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i];
    });
}

Var add_over_time(const Var& x, const Var& e) {
    if (x.shape().size() != 3 || e.shape() != Shape{x.shape()[0], x.shape()[2]}) {
        throw ShapeError("add_over_time", "x [B, L, H] and e [B, H]",
                         shape_str(x.shape()) + " / " + shape_str(e.shape()));
    }
    const std::size_t batch = x.shape()[0], len = x.shape()[1], h = x.shape()[2];
    Tensor out = x.value();
    for (std::size_t b = 0; b < batch; ++b)
        for (std::size_t t = 0; t < len; ++t)
            for (std::size_t k = 0; k < h; ++k) out[(b * len + t) * h + k] += e.value()[b * h + k];
    return make_op(std::move(out), {x, e}, [batch, len, h](Node& n) {
        Node& px = parent(n, 0);
        Node& pe = parent(n, 1);
        if (px.requires_grad) {
            auto& g = px.grad_buffer();
            for (std::size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i];
        }
        if (pe.requires_grad) {
            auto& g = pe.grad_buffer();
            for (std::size_t b = 0; b < batch; ++b)
                for (std::size_t t = 0; t < len; ++t)
                    for (std::size_t k = 0; k < h; ++k) g[b * h + k] += n.grad[(b * len + t) * h + k];
        }
    });
}

Var pairwise_correlation(const Var& x) {
    if (x.shape().size() != 3) throw ShapeError("pairwise_correlation", "[B, F, C]", shape_str(x.shape()));
    const std::size_t batch = x.shape()[0], f = x.shape()[1], c = x.shape()[2];
    if (f < 2) throw ShapeError("pairwise_correlation", "F >= 2", shape_str(x.shape()));
    const std::size_t pairs = c * (c - 1) / 2;

    // Unit-norm centered columns and their norms, kept for the backward pass.
    std::vector<double> unit(batch * f * c, 0.0), norm(batch * c, 0.0);
    Tensor out({batch, pairs});
    for (std::size_t b = 0; b < batch; ++b) {
        const double* xb = x.value().data() + b * f * c;
        double* ub = unit.data() + b * f * c;
        for (std::size_t ch = 0; ch < c; ++ch) {
            double mu = 0.0;
            for (std::size_t t = 0; t < f; ++t) mu += xb[t * c + ch];
            mu /= static_cast<double>(f);
            double ss = 0.0;
            for (std::size_t t = 0; t < f; ++t) {
                const double d = xb[t * c + ch] - mu;
                ub[t * c + ch] = d;
                ss += d * d;
            }
            const double s = std::sqrt(ss);
            // Scale-aware constant test: spread below rounding noise of the mean.
            const bool constant = !(s > 1e-12 * (1.0 + std::abs(mu)) * std::sqrt(static_cast<double>(f)));
            norm[b * c + ch] = constant ? 0.0 : s;
            for (std::size_t t = 0; t < f; ++t) ub[t * c + ch] = constant ? 0.0 : ub[t * c + ch] / s;
        }
        std::size_t k = 0;
        for (std::size_t i = 0; i < c; ++i) {
            for (std::size_t j = i + 1; j < c; ++j, ++k) {
                double r = 0.0;
                if (norm[b * c + i] > 0.0 && norm[b * c + j] > 0.0) {
                    for (std::size_t t = 0; t < f; ++t) r += ub[t * c + i] * ub[t * c + j];
                }
                out[b * pairs + k] = r;
            }
        }
    }
    return make_op(std::move(out), {x}, [batch, f, c, pairs, unit = std::move(unit),
                                         norm = std::move(norm)](Node& n) {
        auto& g = parent(n, 0).grad_buffer();
        std::vector<double> acc(f * c);
        for (std::size_t b = 0; b < batch; ++b) {
            std::fill(acc.begin(), acc.end(), 0.0);
            const double* ub = unit.data() + b * f * c;
            std::size_t k = 0;
            for (std::size_t i = 0; i < c; ++i) {
                for (std::size_t j = i + 1; j < c; ++j, ++k) {
                    const double si = norm[b * c + i], sj = norm[b * c + j];
                    const double gk = n.grad[b * pairs + k];
                    if (si == 0.0 || sj == 0.0 || gk == 0.0) continue;
                    const double r = n.value[b * pairs + k];
                    // d rho / d x_i = (u_j - rho u_i) / s_i, symmetric for x_j.
                    for (std::size_t t = 0; t < f; ++t) {
                        const double ui = ub[t * c + i], uj = ub[t * c + j];
                        acc[t * c + i] += gk * (uj - r * ui) / si;
                        acc[t * c + j] += gk * (ui - r * uj) / sj;
                    }
                }
            }
            double* gb = g.data() + b * f * c;
            for (std::size_t i = 0; i < f * c; ++i) gb[i] += acc[i];
        }
    });
}

Var sum(const Var& x) {
    double s = 0.0;
    for (double v : x.value().storage()) s += v;
    return make_op(Tensor({1}, s), {x}, [](Node& n) {
        auto& g = parent(n, 0).grad_buffer();
        for (auto& v : g) v += n.grad[0];
    });
}

Var mean(const Var& x) {
    if (x.size() == 0) throw ShapeError("mean", "non-empty", shape_str(x.shape()));
    return scale(sum(x), 1.0 / static_cast<double>(x.size()));
}

Var mean_per_sample(const Var& x) {
    const std::size_t batch = x.shape().at(0);
    const std::size_t per = batch ? x.size() / batch : 0;
    Tensor out({batch});
    for (std::size_t b = 0; b < batch; ++b) {
        double s = 0.0;
        for (std::size_t i = 0; i < per; ++i) s += x.value()[b * per + i];
        out[b] = s / static_cast<double>(per);
    }
    return make_op(std::move(out), {x}, [batch, per](Node& n) {
        auto& g = parent(n, 0).grad_buffer();
        for (std::size_t b = 0; b < batch; ++b)
            for (std::size_t i = 0; i < per; ++i) g[b * per + i] += n.grad[b] / static_cast<double>(per);
    });
}

Var mse(const Var& a, const Var& b) {
    const Var d = sub(a, b);
    return mean(mul(d, d));
}

Var bce_with_logits(const Var& logits, std::span<const double> labels) {
    if (logits.size() != labels.size()) {
        throw ShapeError("bce_with_logits", std::to_string(labels.size()) + " logits",
                         shape_str(logits.shape()));
    }
    const std::vector<double> y(labels.begin(), labels.end());
    const double inv = 1.0 / static_cast<double>(y.size());
    double loss = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double z = logits.value()[i];
        // log(1 + exp(-|z|)) + max(z, 0) - z y
        loss += std::log1p(std::exp(-std::abs(z))) + std::max(z, 0.0) - z * y[i];
    }
    return make_op(Tensor({1}, loss * inv), {logits}, [y, inv](Node& n) {
        Node& p = parent(n, 0);
        auto& g = p.grad_buffer();
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += n.grad[0] * inv * (sigmoid_scalar(p.value[i]) - y[i]);
    });
}

}  // namespace comets::nn
