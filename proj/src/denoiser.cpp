#include "sepaint/denoiser.hpp"

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>

#include "sepaint/errors.hpp"
#include "sepaint/rng.hpp"

namespace sepaint {

namespace {

constexpr double kNormEps = 1e-5;

// Offsets into the flat parameter vector. Conv weights are stored
// [c_out][tap][c_in] with tap = u*3 + v so the c_in dot product is contiguous.
struct ParamLayout {
    std::size_t conv_in_w, conv_in_b;
    std::size_t time_w, time_b;
    struct Block {
        std::size_t gamma, beta, conv_w, conv_b;
    };
    std::vector<Block> blocks;
    std::size_t head_w, head_b;
    std::size_t total;
};

ParamLayout layout_of(const DenoiserSpec& s) {
    ParamLayout l;
    std::size_t off = 0;
    const auto c = static_cast<std::size_t>(s.channels);
    const auto k = static_cast<std::size_t>(s.num_classes);
    const auto e = static_cast<std::size_t>(s.time_embed_dim);
    l.conv_in_w = off; off += c * 9 * k;
    l.conv_in_b = off; off += c;
    l.time_w = off; off += c * e;
    l.time_b = off; off += c;
    l.blocks.resize(s.blocks);
    for (int b = 0; b < s.blocks; ++b) {
        l.blocks[b].gamma = off; off += c;
        l.blocks[b].beta = off; off += c;
        l.blocks[b].conv_w = off; off += c * 9 * c;
        l.blocks[b].conv_b = off; off += c;
    }
    l.head_w = off; off += k * c;
    l.head_b = off; off += k;
    l.total = off;
    return l;
}

template <typename Real>
void sinusoidal_embedding(int t, int dim, std::vector<Real>& out) {
    out.resize(dim);
    const int half = dim / 2;
    for (int i = 0; i < half; ++i) {
        const double freq = std::exp(-std::log(10000.0) * i / half);
        out[2 * i] = static_cast<Real>(std::sin(t * freq));
        out[2 * i + 1] = static_cast<Real>(std::cos(t * freq));
    }
    if (dim % 2) out[dim - 1] = Real(0);
}

// out[px][co] = bias[co] + sum_{tap, ci} in[px + d*(tap offset)][ci] * w[co][tap][ci]
template <typename Real>
void conv3x3_forward(const Real* in, int rows, int cols, int c_in, const float* w, const float* b,
                     int c_out, int dil, Real* out) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < cols; ++j) {
            Real* o = out + (static_cast<std::size_t>(i) * cols + j) * c_out;
            for (int co = 0; co < c_out; ++co) o[co] = static_cast<Real>(b[co]);
            for (int u = -1; u <= 1; ++u) {
                const int qi = i + u * dil;
                if (qi < 0 || qi >= rows) continue;
                for (int v = -1; v <= 1; ++v) {
                    const int qj = j + v * dil;
                    if (qj < 0 || qj >= cols) continue;
                    const int tap = (u + 1) * 3 + (v + 1);
                    const Real* src = in + (static_cast<std::size_t>(qi) * cols + qj) * c_in;
                    for (int co = 0; co < c_out; ++co) {
                        const float* wr = w + (static_cast<std::size_t>(co) * 9 + tap) * c_in;
                        Real acc = 0;
                        for (int ci = 0; ci < c_in; ++ci) acc += src[ci] * static_cast<Real>(wr[ci]);
                        o[co] += acc;
                    }
                }
            }
        }
    }
}

// Weight/bias gradients; parallel over c_out so each accumulator has one owner.
template <typename Real>
void conv3x3_backward_params(const Real* in, int rows, int cols, int c_in, const Real* dout,
                             int c_out, int dil, double* dw, double* db) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int co = 0; co < c_out; ++co) {
        double* dwr = dw + static_cast<std::size_t>(co) * 9 * c_in;
        double acc_b = 0.0;
        for (int i = 0; i < rows; ++i) {
            for (int j = 0; j < cols; ++j) {
                const double g = dout[(static_cast<std::size_t>(i) * cols + j) * c_out + co];
                if (g == 0.0) continue;
                acc_b += g;
                for (int u = -1; u <= 1; ++u) {
                    const int qi = i + u * dil;
                    if (qi < 0 || qi >= rows) continue;
                    for (int v = -1; v <= 1; ++v) {
                        const int qj = j + v * dil;
                        if (qj < 0 || qj >= cols) continue;
                        const int tap = (u + 1) * 3 + (v + 1);
                        const Real* src = in + (static_cast<std::size_t>(qi) * cols + qj) * c_in;
                        double* slot = dwr + static_cast<std::size_t>(tap) * c_in;
                        for (int ci = 0; ci < c_in; ++ci) slot[ci] += g * src[ci];
                    }
                }
            }
        }
        db[co] += acc_b;
    }
}

// Input gradients in gather form; parallel over input pixels.
template <typename Real>
void conv3x3_backward_input(const float* w, int c_in, const Real* dout, int rows, int cols,
                            int c_out, int dil, Real* din) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int qi = 0; qi < rows; ++qi) {
        for (int qj = 0; qj < cols; ++qj) {
            Real* d = din + (static_cast<std::size_t>(qi) * cols + qj) * c_in;
            for (int ci = 0; ci < c_in; ++ci) d[ci] = 0;
            for (int u = -1; u <= 1; ++u) {
                const int pi = qi - u * dil;
                if (pi < 0 || pi >= rows) continue;
                for (int v = -1; v <= 1; ++v) {
                    const int pj = qj - v * dil;
                    if (pj < 0 || pj >= cols) continue;
                    const int tap = (u + 1) * 3 + (v + 1);
                    const Real* g = dout + (static_cast<std::size_t>(pi) * cols + pj) * c_out;
                    for (int co = 0; co < c_out; ++co) {
                        const Real gv = g[co];
                        if (gv == Real(0)) continue;
                        const float* wr = w + (static_cast<std::size_t>(co) * 9 + tap) * c_in;
                        for (int ci = 0; ci < c_in; ++ci) d[ci] += gv * static_cast<Real>(wr[ci]);
                    }
                }
            }
        }
    }
}

}  // namespace

std::size_t DenoiserSpec::param_count() const { return layout_of(*this).total; }

std::vector<LayerDesc> layer_table(const DenoiserSpec& spec) {
    const ParamLayout l = layout_of(spec);
    const auto c = static_cast<std::size_t>(spec.channels);
    const auto k = static_cast<std::size_t>(spec.num_classes);
    const auto e = static_cast<std::size_t>(spec.time_embed_dim);
    std::vector<LayerDesc> t;
    t.push_back({"conv_in.weight", l.conv_in_w, c * 9 * k});
    t.push_back({"conv_in.bias", l.conv_in_b, c});
    t.push_back({"time.weight", l.time_w, c * e});
    t.push_back({"time.bias", l.time_b, c});
    for (int b = 0; b < spec.blocks; ++b) {
        const std::string p = "block" + std::to_string(b) + ".";
        t.push_back({p + "norm.gamma", l.blocks[b].gamma, c});
        t.push_back({p + "norm.beta", l.blocks[b].beta, c});
        t.push_back({p + "conv.weight", l.blocks[b].conv_w, c * 9 * c});
        t.push_back({p + "conv.bias", l.blocks[b].conv_b, c});
    }
    t.push_back({"head.weight", l.head_w, k * c});
    t.push_back({"head.bias", l.head_b, k});
    return t;
}

DenoiserParams init_denoiser(const DenoiserSpec& spec, std::uint64_t seed) {
    if (spec.num_classes < 2 || spec.num_classes > 64 || spec.height < 1 || spec.width < 1 ||
        spec.channels < 1 || spec.blocks < 0 || spec.time_embed_dim < 2)
        throw ConfigError("init_denoiser: invalid spec (needs 2 <= K <= 64, positive dims)");

    const ParamLayout l = layout_of(spec);
    DenoiserParams p{spec, std::vector<float>(l.total, 0.0f)};

    RngStream rng(seed);
    auto normal = [&rng]() {
        const double u1 = rng.next_uniform();
        const double u2 = rng.next_uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
    };
    auto fill_normal = [&](std::size_t off, std::size_t n, double stddev) {
        for (std::size_t i = 0; i < n; ++i)
            p.values[off + i] = static_cast<float>(normal() * stddev);
    };

    const auto c = static_cast<std::size_t>(spec.channels);
    const auto k = static_cast<std::size_t>(spec.num_classes);
    const auto e = static_cast<std::size_t>(spec.time_embed_dim);
    fill_normal(l.conv_in_w, c * 9 * k, std::sqrt(2.0 / (9.0 * k)));
    fill_normal(l.time_w, c * e, 1.0 / std::sqrt(static_cast<double>(e)));
    for (int b = 0; b < spec.blocks; ++b) {
        for (std::size_t i = 0; i < c; ++i) p.values[l.blocks[b].gamma + i] = 1.0f;
        fill_normal(l.blocks[b].conv_w, c * 9 * c, std::sqrt(2.0 / (9.0 * c)));
    }
    // head stays zero: initial prediction is uniform
    return p;
}

template <typename Real>
CategoricalField denoiser_forward(const DenoiserParams& params, const CategoricalField& x_t,
                                  int t, DenoiserTrace<Real>* trace) {
    const DenoiserSpec& s = params.spec;
    if (x_t.height != s.height || x_t.width != s.width || x_t.num_classes != s.num_classes)
        throw DomainError("denoiser: input shape does not match trained dims");
    if (t < 1) throw DomainError("denoiser: t must be >= 1");
    if (s.num_classes > 64) throw DomainError("denoiser: K > 64 unsupported");
    if (params.values.size() != s.param_count())
        throw DomainError("denoiser: parameter vector does not match spec");

    const ParamLayout l = layout_of(s);
    const int rows = s.height, cols = s.width, kc = s.num_classes, ch = s.channels;
    const std::size_t npix = static_cast<std::size_t>(rows) * cols;
    const float* pv = params.values.data();

    std::vector<Real> input(npix * kc);
    for (std::size_t i = 0; i < input.size(); ++i)
        input[i] = static_cast<Real>(x_t.probs[i]);

    std::vector<Real> temb;
    sinusoidal_embedding(t, s.time_embed_dim, temb);

    // stem: conv + time bias
    std::vector<Real> h(npix * ch);
    conv3x3_forward(input.data(), rows, cols, kc, pv + l.conv_in_w, pv + l.conv_in_b, ch, 1,
                    h.data());
    std::vector<Real> tbias(ch);
    for (int co = 0; co < ch; ++co) {
        Real acc = static_cast<Real>(pv[l.time_b + co]);
        const float* wr = pv + l.time_w + static_cast<std::size_t>(co) * s.time_embed_dim;
        for (int i = 0; i < s.time_embed_dim; ++i) acc += temb[i] * static_cast<Real>(wr[i]);
        tbias[co] = acc;
    }
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (std::size_t px = 0; px < npix; ++px)
        for (int co = 0; co < ch; ++co) h[px * ch + co] += tbias[co];

    if (trace) {
        trace->valid = false;
        trace->t = t;
        trace->input = input;
        trace->temb = temb;
        trace->features.assign(1, h);
        trace->norm_xhat.clear();
        trace->norm_invstd.clear();
        trace->relu_out.clear();
    }

    std::vector<Real> xhat(npix * ch), relu(npix * ch), invstd(npix), branch(npix * ch);
    for (int b = 0; b < s.blocks; ++b) {
        const float* gamma = pv + l.blocks[b].gamma;
        const float* beta = pv + l.blocks[b].beta;
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
        for (std::size_t px = 0; px < npix; ++px) {
            const Real* hp = h.data() + px * ch;
            Real mean = 0;
            for (int c2 = 0; c2 < ch; ++c2) mean += hp[c2];
            mean /= ch;
            Real var = 0;
            for (int c2 = 0; c2 < ch; ++c2) {
                const Real d = hp[c2] - mean;
                var += d * d;
            }
            var /= ch;
            const Real inv = Real(1) / std::sqrt(var + static_cast<Real>(kNormEps));
            invstd[px] = inv;
            Real* xh = xhat.data() + px * ch;
            Real* rl = relu.data() + px * ch;
            for (int c2 = 0; c2 < ch; ++c2) {
                xh[c2] = (hp[c2] - mean) * inv;
                const Real n = static_cast<Real>(gamma[c2]) * xh[c2] + static_cast<Real>(beta[c2]);
                rl[c2] = n > Real(0) ? n : Real(0);
            }
        }
        conv3x3_forward(relu.data(), rows, cols, ch, pv + l.blocks[b].conv_w,
                        pv + l.blocks[b].conv_b, ch, s.dilation(b), branch.data());
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
        for (std::size_t i = 0; i < h.size(); ++i) h[i] += branch[i];

        if (trace) {
            trace->norm_xhat.push_back(xhat);
            trace->norm_invstd.push_back(invstd);
            trace->relu_out.push_back(relu);
            trace->features.push_back(h);
        }
    }

    // 1x1 head + per-pixel softmax
    CategoricalField out(rows, cols, kc);
    std::vector<Real> soft(npix * kc);
    const float* hw = pv + l.head_w;
    const float* hb = pv + l.head_b;
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (std::size_t px = 0; px < npix; ++px) {
        const Real* hp = h.data() + px * ch;
        Real logits[64];  // K <= 64 by palette scale; guarded below
        Real max_logit = -std::numeric_limits<Real>::infinity();
        for (int k2 = 0; k2 < kc; ++k2) {
            Real acc = static_cast<Real>(hb[k2]);
            const float* wr = hw + static_cast<std::size_t>(k2) * ch;
            for (int c2 = 0; c2 < ch; ++c2) acc += hp[c2] * static_cast<Real>(wr[c2]);
            logits[k2] = acc;
            if (acc > max_logit) max_logit = acc;
        }
        Real sum = 0;
        for (int k2 = 0; k2 < kc; ++k2) {
            logits[k2] = std::exp(logits[k2] - max_logit);
            sum += logits[k2];
        }
        Real* sp = soft.data() + px * kc;
        for (int k2 = 0; k2 < kc; ++k2) {
            sp[k2] = logits[k2] / sum;
            out.probs[px * kc + k2] = static_cast<double>(sp[k2]);
        }
    }

    if (trace) {
        trace->softmax_out = std::move(soft);
        trace->valid = true;
    }
    return out;
}

template <typename Real>
std::vector<double> denoiser_backward(const DenoiserParams& params,
                                      const DenoiserTrace<Real>& trace,
                                      const CategoricalField& grad_output) {
    if (!trace.valid) throw UsageError("denoiser_backward: no forward trace");
    const DenoiserSpec& s = params.spec;
    if (grad_output.height != s.height || grad_output.width != s.width ||
        grad_output.num_classes != s.num_classes)
        throw DomainError("denoiser_backward: grad shape mismatch");

    const ParamLayout l = layout_of(s);
    const int rows = s.height, cols = s.width, kc = s.num_classes, ch = s.channels;
    const std::size_t npix = static_cast<std::size_t>(rows) * cols;
    const float* pv = params.values.data();

    std::vector<double> grad(l.total, 0.0);

    // softmax + head
    std::vector<Real> dlogit(npix * kc);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (std::size_t px = 0; px < npix; ++px) {
        const Real* sp = trace.softmax_out.data() + px * kc;
        const double* gp = grad_output.probs.data() + px * kc;
        double dot = 0;
        for (int k2 = 0; k2 < kc; ++k2) dot += gp[k2] * sp[k2];
        for (int k2 = 0; k2 < kc; ++k2)
            dlogit[px * kc + k2] = sp[k2] * static_cast<Real>(gp[k2] - dot);
    }

    const std::vector<Real>& h_last = trace.features.back();
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int k2 = 0; k2 < kc; ++k2) {
        double* dwr = grad.data() + l.head_w + static_cast<std::size_t>(k2) * ch;
        double acc_b = 0;
        for (std::size_t px = 0; px < npix; ++px) {
            const double g = dlogit[px * kc + k2];
            acc_b += g;
            const Real* hp = h_last.data() + px * ch;
            for (int c2 = 0; c2 < ch; ++c2) dwr[c2] += g * hp[c2];
        }
        grad[l.head_b + k2] = acc_b;
    }

    std::vector<Real> dh(npix * ch);
    const float* hw = pv + l.head_w;
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (std::size_t px = 0; px < npix; ++px) {
        Real* d = dh.data() + px * ch;
        for (int c2 = 0; c2 < ch; ++c2) d[c2] = 0;
        for (int k2 = 0; k2 < kc; ++k2) {
            const Real g = dlogit[px * kc + k2];
            if (g == Real(0)) continue;
            const float* wr = hw + static_cast<std::size_t>(k2) * ch;
            for (int c2 = 0; c2 < ch; ++c2) d[c2] += g * static_cast<Real>(wr[c2]);
        }
    }

    // residual blocks in reverse
    std::vector<Real> dr(npix * ch), dx(npix * ch);
    for (int b = s.blocks - 1; b >= 0; --b) {
        const std::vector<Real>& r = trace.relu_out[b];
        const std::vector<Real>& xh = trace.norm_xhat[b];
        const std::vector<Real>& inv = trace.norm_invstd[b];
        const float* gamma = pv + l.blocks[b].gamma;

        conv3x3_backward_params(r.data(), rows, cols, ch, dh.data(), ch, s.dilation(b),
                                grad.data() + l.blocks[b].conv_w,
                                grad.data() + l.blocks[b].conv_b);
        conv3x3_backward_input(pv + l.blocks[b].conv_w, ch, dh.data(), rows, cols, ch,
                               s.dilation(b), dr.data());

        // relu mask, then per-pixel layernorm backward
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
        for (std::size_t px = 0; px < npix; ++px) {
            Real* drp = dr.data() + px * ch;
            const Real* rp = r.data() + px * ch;
            const Real* xp = xh.data() + px * ch;
            Real* dxp = dx.data() + px * ch;
            Real m1 = 0, m2 = 0;
            for (int c2 = 0; c2 < ch; ++c2) {
                const Real dn = rp[c2] > Real(0) ? drp[c2] : Real(0);
                drp[c2] = dn;  // reuse as dn storage
                const Real dxh = dn * static_cast<Real>(gamma[c2]);
                m1 += dxh;
                m2 += dxh * xp[c2];
            }
            m1 /= ch;
            m2 /= ch;
            for (int c2 = 0; c2 < ch; ++c2) {
                const Real dxh = drp[c2] * static_cast<Real>(gamma[c2]);
                dxp[c2] = inv[px] * (dxh - m1 - xp[c2] * m2);
            }
        }
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
        for (int c2 = 0; c2 < ch; ++c2) {
            double acc_g = 0, acc_b = 0;
            for (std::size_t px = 0; px < npix; ++px) {
                const double dn = dr[px * ch + c2];
                acc_g += dn * xh[px * ch + c2];
                acc_b += dn;
            }
            grad[l.blocks[b].gamma + c2] = acc_g;
            grad[l.blocks[b].beta + c2] = acc_b;
        }
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
        for (std::size_t i = 0; i < dh.size(); ++i) dh[i] += dx[i];
    }

    // stem: time projection then input conv
    std::vector<double> dtb(ch, 0.0);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int c2 = 0; c2 < ch; ++c2) {
        double acc = 0;
        for (std::size_t px = 0; px < npix; ++px) acc += dh[px * ch + c2];
        dtb[c2] = acc;
    }
    for (int c2 = 0; c2 < ch; ++c2) {
        grad[l.time_b + c2] = dtb[c2];
        double* dwr = grad.data() + l.time_w + static_cast<std::size_t>(c2) * s.time_embed_dim;
        for (int i = 0; i < s.time_embed_dim; ++i) dwr[i] = dtb[c2] * trace.temb[i];
    }
    conv3x3_backward_params(trace.input.data(), rows, cols, kc, dh.data(), ch, 1,
                            grad.data() + l.conv_in_w, grad.data() + l.conv_in_b);
    return grad;
}

CategoricalField predict_x0(const DenoiserParams& params, const CategoricalField& x_t, int t) {
    return denoiser_forward<float>(params, x_t, t, nullptr);
}

template struct DenoiserTrace<float>;
template struct DenoiserTrace<double>;

template CategoricalField denoiser_forward<float>(const DenoiserParams&, const CategoricalField&,
                                                  int, DenoiserTrace<float>*);
template CategoricalField denoiser_forward<double>(const DenoiserParams&, const CategoricalField&,
                                                   int, DenoiserTrace<double>*);
template std::vector<double> denoiser_backward<float>(const DenoiserParams&,
                                                      const DenoiserTrace<float>&,
                                                      const CategoricalField&);
template std::vector<double> denoiser_backward<double>(const DenoiserParams&,
                                                       const DenoiserTrace<double>&,
                                                       const CategoricalField&);

}  // namespace sepaint
