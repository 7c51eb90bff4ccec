#include "triprank/nn/ops.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "triprank/error.hpp"

namespace triprank::nn {

namespace {

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (!a.same_shape(b))
    throw ShapeMismatch(std::string(op) + ": " + to_string(a.shape()) + " vs " +
                        to_string(b.shape()));
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ShapeMismatch(message);
}

}  // namespace

std::size_t Mask::count(std::size_t b) const noexcept {
  std::size_t n = 0;
  for (std::size_t i = 0; i < length; ++i) n += at(b, i) != 0.0 ? 1 : 0;
  return n;
}

Var add(Var a, Var b) {
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  require_same_shape(av, bv, "add");
  Tensor out = av;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bv[i];
  const auto ia = a.id(), ib = b.id();
  return a.tape().record(std::move(out), {a, b}, [ia, ib](Tape& t, std::uint32_t self) {
    const Tensor& g = t.grad(self);
    for (const auto id : {ia, ib}) {
      if (!t.needs_grad(id)) continue;
      Tensor& gi = t.grad(id);
      for (std::size_t i = 0; i < g.size(); ++i) gi[i] += g[i];
    }
  });
}

Var mul(Var a, Var b) {
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  require_same_shape(av, bv, "mul");
  Tensor out(av.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] * bv[i];
  const auto ia = a.id(), ib = b.id();
  return a.tape().record(std::move(out), {a, b}, [ia, ib](Tape& t, std::uint32_t self) {
    const Tensor& g = t.grad(self);
    const Tensor& va = t.value(ia);
    const Tensor& vb = t.value(ib);
    if (t.needs_grad(ia)) {
      Tensor& ga = t.grad(ia);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * vb[i];
    }
    if (t.needs_grad(ib)) {
      Tensor& gb = t.grad(ib);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * va[i];
    }
  });
}

Var relu(Var x) {
  Tensor out = x.value();
  for (auto& v : out.values()) v = std::max(v, 0.0);
  const auto ix = x.id();
  return x.tape().record(std::move(out), {x}, [ix](Tape& t, std::uint32_t self) {
    const Tensor& g = t.grad(self);
    const Tensor& v = t.value(ix);
    Tensor& gx = t.grad(ix);
    for (std::size_t i = 0; i < g.size(); ++i)
      if (v[i] > 0.0) gx[i] += g[i];
  });
}

Var scale(Var x, double factor) {
  Tensor out = x.value();
  for (auto& v : out.values()) v *= factor;
  const auto ix = x.id();
  return x.tape().record(std::move(out), {x}, [ix, factor](Tape& t, std::uint32_t self) {
    const Tensor& g = t.grad(self);
    Tensor& gx = t.grad(ix);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * factor;
  });
}

Var sum(Var x) {
  double total = 0.0;
  for (const double v : x.value().values()) total += v;
  const auto ix = x.id();
  return x.tape().record(Tensor({1}, total), {x}, [ix](Tape& t, std::uint32_t self) {
    const double g = t.grad(self)[0];
    for (auto& v : t.grad(ix).values()) v += g;
  });
}

Var mean(Var x) {
  const auto n = static_cast<double>(std::max<std::size_t>(x.value().size(), 1));
  return scale(sum(x), 1.0 / n);
}

Var dense(Var x, Var weight, Var bias) {
  const Tensor& xv = x.value();
  const Tensor& w = weight.value();
  const Tensor& b = bias.value();
  require(w.rank() == 2 && xv.last_dim() == w.dim(0) && b.size() == w.dim(1),
          "dense: input " + to_string(xv.shape()) + ", weight " + to_string(w.shape()) +
              ", bias " + to_string(b.shape()));
  const std::size_t rows = xv.rows();
  const std::size_t din = w.dim(0);
  const std::size_t dout = w.dim(1);

  Shape shape = xv.shape();
  shape.back() = dout;
  Tensor out(shape);
  for (std::size_t r = 0; r < rows; ++r) {
    double* y = out.data() + r * dout;
    const double* xr = xv.data() + r * din;
    std::copy(b.data(), b.data() + dout, y);
    for (std::size_t i = 0; i < din; ++i) {
      const double xi = xr[i];
      if (xi == 0.0) continue;
      const double* wr = w.data() + i * dout;
      for (std::size_t o = 0; o < dout; ++o) y[o] += xi * wr[o];
    }
  }

  const auto ix = x.id(), iw = weight.id(), ib = bias.id();
  return x.tape().record(std::move(out), {x, weight, bias},
                         [ix, iw, ib, rows, din, dout](Tape& t, std::uint32_t self) {
    const Tensor& g = t.grad(self);
    const Tensor& xv = t.value(ix);
    const Tensor& w = t.value(iw);
    if (t.needs_grad(ix)) {
      Tensor& gx = t.grad(ix);
      for (std::size_t r = 0; r < rows; ++r) {
        const double* gr = g.data() + r * dout;
        double* gxr = gx.data() + r * din;
        for (std::size_t i = 0; i < din; ++i) {
          const double* wr = w.data() + i * dout;
          double acc = 0.0;
          for (std::size_t o = 0; o < dout; ++o) acc += gr[o] * wr[o];
          gxr[i] += acc;
        }
      }
    }
    if (t.needs_grad(iw)) {
      Tensor& gw = t.grad(iw);
      for (std::size_t r = 0; r < rows; ++r) {
        const double* gr = g.data() + r * dout;
        const double* xr = xv.data() + r * din;
        for (std::size_t i = 0; i < din; ++i) {
          const double xi = xr[i];
          if (xi == 0.0) continue;
          double* gwr = gw.data() + i * dout;
          for (std::size_t o = 0; o < dout; ++o) gwr[o] += xi * gr[o];
        }
      }
    }
    if (t.needs_grad(ib)) {
      Tensor& gb = t.grad(ib);
      for (std::size_t r = 0; r < rows; ++r) {
        const double* gr = g.data() + r * dout;
        for (std::size_t o = 0; o < dout; ++o) gb[o] += gr[o];
      }
    }
  });
}

Var layer_norm(Var x, Var gain, Var shift, double eps) {
  const Tensor& xv = x.value();
  const Tensor& gv = gain.value();
  const Tensor& sv = shift.value();
  const std::size_t d = xv.last_dim();
  require(d >= 1 && gv.size() == d && sv.size() == d,
          "layer_norm: input " + to_string(xv.shape()) + ", gain " + to_string(gv.shape()));
  const std::size_t rows = xv.rows();

  auto x_hat = std::make_shared<std::vector<double>>(xv.size());
  auto inv_std = std::make_shared<std::vector<double>>(rows);
  Tensor out(xv.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    const double* xr = xv.data() + r * d;
    double mu = 0.0;
    for (std::size_t i = 0; i < d; ++i) mu += xr[i];
    mu /= static_cast<double>(d);
    double var = 0.0;
    for (std::size_t i = 0; i < d; ++i) var += (xr[i] - mu) * (xr[i] - mu);
    var /= static_cast<double>(d);
    const double rstd = 1.0 / std::sqrt(var + eps);
    (*inv_std)[r] = rstd;
    for (std::size_t i = 0; i < d; ++i) {
      const double h = (xr[i] - mu) * rstd;
      (*x_hat)[r * d + i] = h;
      out[r * d + i] = gv[i] * h + sv[i];
    }
  }

  const auto ix = x.id(), ig = gain.id(), is = shift.id();
  return x.tape().record(std::move(out), {x, gain, shift},
                         [ix, ig, is, rows, d, x_hat, inv_std](Tape& t, std::uint32_t self) {
    const Tensor& g = t.grad(self);
    const Tensor& gv = t.value(ig);
    if (t.needs_grad(ig) || t.needs_grad(is)) {
      Tensor* gg = t.needs_grad(ig) ? &t.grad(ig) : nullptr;
      Tensor* gs = t.needs_grad(is) ? &t.grad(is) : nullptr;
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t i = 0; i < d; ++i) {
          if (gg) (*gg)[i] += g[r * d + i] * (*x_hat)[r * d + i];
          if (gs) (*gs)[i] += g[r * d + i];
        }
    }
    if (!t.needs_grad(ix)) return;
    Tensor& gx = t.grad(ix);
    const double nd = static_cast<double>(d);
    for (std::size_t r = 0; r < rows; ++r) {
      double sum_dh = 0.0, sum_dh_h = 0.0;
      for (std::size_t i = 0; i < d; ++i) {
        const double dh = g[r * d + i] * gv[i];
        sum_dh += dh;
        sum_dh_h += dh * (*x_hat)[r * d + i];
      }
      const double rstd = (*inv_std)[r];
      for (std::size_t i = 0; i < d; ++i) {
        const double dh = g[r * d + i] * gv[i];
        gx[r * d + i] += rstd / nd * (nd * dh - sum_dh - (*x_hat)[r * d + i] * sum_dh_h);
      }
    }
  });
}

Var concat_last(std::span<const Var> parts) {
  require(!parts.empty(), "concat_last: no inputs");
  const std::size_t rows = parts.front().value().rows();
  std::vector<std::size_t> widths;
  std::size_t total = 0;
  for (const Var& p : parts) {
    require(p.value().rows() == rows, "concat_last: row count mismatch " +
                                          to_string(p.value().shape()) + " vs " +
                                          to_string(parts.front().value().shape()));
    widths.push_back(p.value().last_dim());
    total += widths.back();
  }
  Shape shape = parts.front().value().shape();
  shape.back() = total;
  Tensor out(shape);
  std::size_t offset = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const Tensor& v = parts[k].value();
    for (std::size_t r = 0; r < rows; ++r)
      std::copy(v.data() + r * widths[k], v.data() + (r + 1) * widths[k],
                out.data() + r * total + offset);
    offset += widths[k];
  }

  std::vector<std::uint32_t> ids;
  for (const Var& p : parts) ids.push_back(p.id());
  const std::vector<Var> inputs(parts.begin(), parts.end());
  return parts.front().tape().record(std::move(out), inputs,
                                     [ids, widths, rows, total](Tape& t, std::uint32_t self) {
    const Tensor& g = t.grad(self);
    std::size_t offset = 0;
    for (std::size_t k = 0; k < ids.size(); ++k) {
      if (t.needs_grad(ids[k])) {
        Tensor& gk = t.grad(ids[k]);
        for (std::size_t r = 0; r < rows; ++r)
          for (std::size_t i = 0; i < widths[k]; ++i)
            gk[r * widths[k] + i] += g[r * total + offset + i];
      }
      offset += widths[k];
    }
  });
}

Var gather_rows(Var table, std::span<const std::int32_t> indices, const Shape& index_shape) {
  const Tensor& tv = table.value();
  require(tv.rank() == 2 && element_count(index_shape) == indices.size(),
          "gather_rows: table " + to_string(tv.shape()) + ", index shape " +
              to_string(index_shape));
  const std::size_t d = tv.dim(1);
  const std::size_t vocab = tv.dim(0);
  Shape shape = index_shape;
  shape.push_back(d);
  Tensor out(shape);
  std::vector<std::int32_t> idx(indices.begin(), indices.end());
  for (std::size_t r = 0; r < idx.size(); ++r) {
    const auto row = static_cast<std::size_t>(idx[r]);
    require(idx[r] >= 0 && row < vocab, "gather_rows: index " + std::to_string(idx[r]) +
                                            " out of range " + std::to_string(vocab));
    std::copy(tv.data() + row * d, tv.data() + (row + 1) * d, out.data() + r * d);
  }
  const auto it = table.id();
  return table.tape().record(std::move(out), {table},
                             [it, idx = std::move(idx), d](Tape& t, std::uint32_t self) {
    const Tensor& g = t.grad(self);
    Tensor& gt = t.grad(it);
    for (std::size_t r = 0; r < idx.size(); ++r) {
      double* dst = gt.data() + static_cast<std::size_t>(idx[r]) * d;
      for (std::size_t i = 0; i < d; ++i) dst[i] += g[r * d + i];
    }
  });
}

Var scale_rows(Var x, std::span<const double> row_scale) {
  const Tensor& xv = x.value();
  require(row_scale.size() == xv.rows(), "scale_rows: " + std::to_string(row_scale.size()) +
                                             " scales for " + std::to_string(xv.rows()) + " rows");
  const std::size_t d = xv.last_dim();
  Tensor out = xv;
  for (std::size_t r = 0; r < xv.rows(); ++r)
    for (std::size_t i = 0; i < d; ++i) out[r * d + i] *= row_scale[r];
  std::vector<double> s(row_scale.begin(), row_scale.end());
  const auto ix = x.id();
  return x.tape().record(std::move(out), {x}, [ix, s = std::move(s), d](Tape& t, std::uint32_t self) {
    const Tensor& g = t.grad(self);
    Tensor& gx = t.grad(ix);
    for (std::size_t r = 0; r < s.size(); ++r)
      for (std::size_t i = 0; i < d; ++i) gx[r * d + i] += g[r * d + i] * s[r];
  });
}

Var scaled_dot_attention(Var q, Var k, Var v, const Mask& key_mask, std::size_t heads,
                         std::vector<double>* weights_out) {
  const Tensor& qv = q.value();
  const Tensor& kv = k.value();
  const Tensor& vv = v.value();
  require(qv.rank() == 3 && kv.rank() == 3 && kv.same_shape(vv) && qv.dim(0) == kv.dim(0) &&
              qv.dim(2) == kv.dim(2),
          "attention: q " + to_string(qv.shape()) + ", k " + to_string(kv.shape()) + ", v " +
              to_string(vv.shape()));
  const std::size_t B = qv.dim(0), NQ = qv.dim(1), NK = kv.dim(1), D = qv.dim(2);
  require(heads >= 1 && D % heads == 0,
          "attention: width " + std::to_string(D) + " not divisible by " + std::to_string(heads));
  require(key_mask.batch == B && key_mask.length == NK,
          "attention: mask (" + std::to_string(key_mask.batch) + ", " +
              std::to_string(key_mask.length) + ") for keys " + to_string(kv.shape()));
  const std::size_t HD = D / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(HD));

  auto probs = std::make_shared<std::vector<double>>(B * heads * NQ * NK, 0.0);
  Tensor out(qv.shape());
  std::vector<double> logits(NK);
  for (std::size_t b = 0; b < B; ++b) {
    for (std::size_t h = 0; h < heads; ++h) {
      for (std::size_t i = 0; i < NQ; ++i) {
        const double* qr = qv.data() + (b * NQ + i) * D + h * HD;
        double max_logit = -INFINITY;
        for (std::size_t j = 0; j < NK; ++j) {
          if (key_mask.at(b, j) == 0.0) continue;
          const double* kr = kv.data() + (b * NK + j) * D + h * HD;
          double s = 0.0;
          for (std::size_t e = 0; e < HD; ++e) s += qr[e] * kr[e];
          logits[j] = s * scale;
          max_logit = std::max(max_logit, logits[j]);
        }
        if (max_logit == -INFINITY) continue;  // every key masked
        double* p = probs->data() + ((b * heads + h) * NQ + i) * NK;
        double z = 0.0;
        for (std::size_t j = 0; j < NK; ++j) {
          if (key_mask.at(b, j) == 0.0) continue;
          p[j] = std::exp(logits[j] - max_logit);
          z += p[j];
        }
        double* o = out.data() + (b * NQ + i) * D + h * HD;
        for (std::size_t j = 0; j < NK; ++j) {
          if (p[j] == 0.0) continue;
          p[j] /= z;
          const double* vr = vv.data() + (b * NK + j) * D + h * HD;
          for (std::size_t e = 0; e < HD; ++e) o[e] += p[j] * vr[e];
        }
      }
    }
  }
  if (weights_out != nullptr) *weights_out = *probs;

  const auto iq = q.id(), ik = k.id(), iv = v.id();
  return q.tape().record(std::move(out), {q, k, v},
                         [iq, ik, iv, probs, B, NQ, NK, D, HD, heads, scale](Tape& t,
                                                                            std::uint32_t self) {
    const Tensor& g = t.grad(self);
    const Tensor& qv = t.value(iq);
    const Tensor& kv = t.value(ik);
    const Tensor& vv = t.value(iv);
    Tensor* gq = t.needs_grad(iq) ? &t.grad(iq) : nullptr;
    Tensor* gk = t.needs_grad(ik) ? &t.grad(ik) : nullptr;
    Tensor* gv = t.needs_grad(iv) ? &t.grad(iv) : nullptr;
    std::vector<double> dp(NK);
    for (std::size_t b = 0; b < B; ++b) {
      for (std::size_t h = 0; h < heads; ++h) {
        for (std::size_t i = 0; i < NQ; ++i) {
          const double* p = probs->data() + ((b * heads + h) * NQ + i) * NK;
          const double* go = g.data() + (b * NQ + i) * D + h * HD;
          double weighted = 0.0;
          for (std::size_t j = 0; j < NK; ++j) {
            if (p[j] == 0.0) {
              dp[j] = 0.0;
              continue;
            }
            const double* vr = vv.data() + (b * NK + j) * D + h * HD;
            double s = 0.0;
            for (std::size_t e = 0; e < HD; ++e) s += go[e] * vr[e];
            dp[j] = s;
            weighted += p[j] * s;
            if (gv) {
              double* gvr = gv->data() + (b * NK + j) * D + h * HD;
              for (std::size_t e = 0; e < HD; ++e) gvr[e] += p[j] * go[e];
            }
          }
          const double* qr = qv.data() + (b * NQ + i) * D + h * HD;
          double* gqr = gq ? gq->data() + (b * NQ + i) * D + h * HD : nullptr;
          for (std::size_t j = 0; j < NK; ++j) {
            if (p[j] == 0.0) continue;
            const double ds = p[j] * (dp[j] - weighted) * scale;
            const double* kr = kv.data() + (b * NK + j) * D + h * HD;
            if (gqr)
              for (std::size_t e = 0; e < HD; ++e) gqr[e] += ds * kr[e];
            if (gk) {
              double* gkr = gk->data() + (b * NK + j) * D + h * HD;
              for (std::size_t e = 0; e < HD; ++e) gkr[e] += ds * qr[e];
            }
          }
        }
      }
    }
  });
}

Var rowdot(Var a, Var f) {
  const Tensor& av = a.value();
  const Tensor& fv = f.value();
  require(av.rank() == 3 && fv.rank() == 2 && av.dim(0) == fv.dim(0) && av.dim(2) == fv.dim(1),
          "rowdot: " + to_string(av.shape()) + " with " + to_string(fv.shape()));
  const std::size_t B = av.dim(0), N = av.dim(1), D = av.dim(2);
  Tensor out({B, N});
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t n = 0; n < N; ++n) {
      double s = 0.0;
      for (std::size_t e = 0; e < D; ++e) s += av[(b * N + n) * D + e] * fv[b * D + e];
      out[b * N + n] = s;
    }
  const auto ia = a.id(), iff = f.id();
  return a.tape().record(std::move(out), {a, f}, [ia, iff, B, N, D](Tape& t, std::uint32_t self) {
    const Tensor& g = t.grad(self);
    const Tensor& av = t.value(ia);
    const Tensor& fv = t.value(iff);
    if (t.needs_grad(ia)) {
      Tensor& ga = t.grad(ia);
      for (std::size_t b = 0; b < B; ++b)
        for (std::size_t n = 0; n < N; ++n)
          for (std::size_t e = 0; e < D; ++e) ga[(b * N + n) * D + e] += g[b * N + n] * fv[b * D + e];
    }
    if (t.needs_grad(iff)) {
      Tensor& gf = t.grad(iff);
      for (std::size_t b = 0; b < B; ++b)
        for (std::size_t n = 0; n < N; ++n)
          for (std::size_t e = 0; e < D; ++e) gf[b * D + e] += g[b * N + n] * av[(b * N + n) * D + e];
    }
  });
}

}  // namespace triprank::nn
