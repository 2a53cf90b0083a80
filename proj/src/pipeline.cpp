// Copyright 2026 The jpegai-core Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "jpegai/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <string>

#include "jpegai/container.hpp"
#include "jpegai/error.hpp"
#include "jpegai/scaling.hpp"
#include "jpegai/transform.hpp"

namespace jpegai {
namespace {

const TableSet& tables_or_default(const TableSet* t) { return t != nullptr ? *t : default_tables(); }

int32_t round_div(int64_t num, int64_t den) {
  const int64_t mag = (std::llabs(num) * 2 + den) / (2 * den);
  return saturate_i32(num < 0 ? -mag : mag);
}

// Decomposition level of a coefficient slot within one plane: 5 for LL.
int channel_level(int local) {
  if (local == 0) return 5;
  if (local < 4) return 4;
  if (local < 16) return 3;
  if (local < 64) return 2;
  return 1;
}

int32_t sigma_base(int local) {
  const int level = channel_level(local);
  if (level >= 3) return 1511;
  return level == 2 ? 1485 : 1467;
}

PlaneTensor pad_replicate(const PlaneTensor& x, int h, int w) {
  if (x.height() == h && x.width() == w) return x;
  PlaneTensor out(x.channels(), h, w);
  for (int c = 0; c < x.channels(); ++c) {
    for (int i = 0; i < h; ++i) {
      const int si = std::min(i, x.height() - 1);
      for (int j = 0; j < w; ++j) out(c, i, j) = x(c, si, std::min(j, x.width() - 1));
    }
  }
  return out;
}

PlaneTensor stack(std::initializer_list<const PlaneTensor*> planes) {
  const PlaneTensor& first = **planes.begin();
  PlaneTensor out(static_cast<int>(planes.size()), first.height(), first.width());
  int c = 0;
  for (const PlaneTensor* p : planes) {
    require_same_shape(Shape3{1, first.height(), first.width()}, p->shape(), "stack");
    std::copy(p->data().begin(), p->data().end(), out.plane(c++).begin());
  }
  return out;
}

PlaneTensor channel(const PlaneTensor& x, int c) {
  PlaneTensor out(1, x.height(), x.width());
  std::copy(x.plane(c).begin(), x.plane(c).end(), out.data().begin());
  return out;
}

template <typename T>
Tensor3<T> channels(const Tensor3<T>& x, int first, int count) {
  Tensor3<T> out(count, x.height(), x.width());
  for (int c = 0; c < count; ++c) std::copy(x.plane(first + c).begin(), x.plane(first + c).end(), out.plane(c).begin());
  return out;
}

// Latent geometry of a coded picture.
struct Dims {
  int H, W, Hc, Wc, h, w, hc, wc, cv, ch;
};

Dims dims_of(const PictureHeader& header) {
  Dims d{};
  d.H = static_cast<int>(header.height);
  d.W = static_cast<int>(header.width);
  d.cv = header.chroma_factor_v();
  d.ch = header.chroma_factor_h();
  d.Hc = ceil_div(d.H, d.cv);
  d.Wc = ceil_div(d.W, d.ch);
  d.h = ceil_div(d.H, kLatentStride);
  d.w = ceil_div(d.W, kLatentStride);
  d.hc = ceil_div(d.Hc, kLatentStride);
  d.wc = ceil_div(d.Wc, kLatentStride);
  return d;
}

// State shared by the encoder and the decoder once the hyper latents are known.
struct Context {
  Dims dims;
  PlaneTensor p_y, p_uv;
  PlaneTensor sigma_y, sigma_uv;
  PlaneTensor pooled_y, pooled_uv;
  GainState gain;
  std::array<bool, 2> rvs{};
  std::vector<int> ids_y, ids_uv;
  RegionGrid grid;
  std::vector<Rect> uv_rects;
};

Context derive_context(const PictureHeader& header, const RegionGrid& grid, const PlaneTensor& z_y,
                       const PlaneTensor& z_uv, const std::optional<PlaneTensor>& gain3d, const TableSet& tables,
                       Exec exec) {
  Context ctx;
  ctx.dims = dims_of(header);
  const Dims& d = ctx.dims;
  ctx.grid = grid;
  for (const Rect& r : grid.regions) ctx.uv_rects.push_back(RegionGrid::scale_down(r, d.cv, d.ch, d.hc, d.wc));
  ctx.p_y = hyper_prediction_primary(z_y, d.h, d.w);
  ctx.p_uv = hyper_prediction_secondary(z_uv, d.hc, d.wc);
  ctx.sigma_y = hyper_sigma(z_y, d.h, d.w, kLumaChannels);
  ctx.sigma_uv = hyper_sigma(z_uv, d.hc, d.wc, kChromaPlaneChannels);
  ctx.gain = build_gain_state(header.model_id, {header.beta_displacement_log[0], header.beta_displacement_log[1]},
                              gain3d, tables.gain, ctx.sigma_y.shape(), ctx.sigma_uv.shape(), d.cv, d.ch);
  apply_gain_sigma(ctx.sigma_y, ctx.gain, 0, exec);
  apply_gain_sigma(ctx.sigma_uv, ctx.gain, 1, exec);
  ctx.pooled_y = average_variance(ctx.sigma_y, exec);
  ctx.pooled_uv = average_variance(ctx.sigma_uv, exec);
  for (int comp = 0; comp < 2; ++comp) ctx.rvs[comp] = header.grfs_enable_flag[comp] || header.rvs_enable_flag[comp];
  ctx.ids_y = rvs_ids(kLumaChannels, header.grfs_y, header.grfs_enable_flag[0], header.rvs_enable_flag[0]);
  ctx.ids_uv = rvs_ids(kChromaChannels, header.grfs_uv, header.grfs_enable_flag[1], header.rvs_enable_flag[1]);
  if (ctx.rvs[0]) rvs_apply_sigma(ctx.sigma_y, ctx.pooled_y, tables.rvs, header.model_id, ctx.ids_y, exec);
  if (ctx.rvs[1]) rvs_apply_sigma(ctx.sigma_uv, ctx.pooled_uv, tables.rvs, header.model_id, ctx.ids_uv, exec);
  return ctx;
}

// Decoder-side scaling of one coded residual value, mirrored by the encoder.
struct ResidualScaler {
  const Context& ctx;
  const TableSet& tables;
  int model;

  int32_t operator()(int comp, int c, int i, int j, int32_t q) const {
    const PlaneTensor& m_log = ctx.gain.m_log[comp];
    int32_t x = mul_m_inv(saturate_i32(int64_t{q} << kLatentFracBits), tables.gain.inv(m_log(c, i, j)));
    if (ctx.rvs[comp]) {
      const PlaneTensor& pooled = comp == 0 ? ctx.pooled_y : ctx.pooled_uv;
      const auto& ids = comp == 0 ? ctx.ids_y : ctx.ids_uv;
      const int64_t t2 = tables.rvs.T2(model, ids[c], pooled(c, i / kPoolSize, j / kPoolSize));
      x = saturate_i32(int64_t{x} * t2 / 65536);
    }
    return x;
  }

  double step(int comp, int c, int i, int j) const {
    double s = (1 << kLatentFracBits) * m_inv_value(tables.gain.inv(ctx.gain.m_log[comp](c, i, j)));
    if (ctx.rvs[comp]) {
      const PlaneTensor& pooled = comp == 0 ? ctx.pooled_y : ctx.pooled_uv;
      const auto& ids = comp == 0 ? ctx.ids_y : ctx.ids_uv;
      s *= tables.rvs.T2(model, ids[c], pooled(c, i / kPoolSize, j / kPoolSize)) / 65536.0;
    }
    return s;
  }

  // Coded value whose reconstruction is nearest to `target`.
  int32_t quantize(int comp, int c, int i, int j, int32_t target, int32_t& recon) const {
    const double s = step(comp, c, i, j);
    int32_t q0 = 0;
    if (s > 0) {
      const double guess = std::round(target / s);
      q0 = static_cast<int32_t>(std::clamp<double>(guess, -kMaxEscapeExtra, kMaxEscapeExtra));
    }
    int32_t best_q = 0;
    int32_t best_r = (*this)(comp, c, i, j, 0);
    int64_t best_err = std::llabs(int64_t{best_r} - target);
    for (int32_t q = q0 - 1; q <= q0 + 1; ++q) {
      if (q == 0 || q < -kMaxEscapeExtra || q > kMaxEscapeExtra) continue;
      const int32_t r = (*this)(comp, c, i, j, q);
      const int64_t err = std::llabs(int64_t{r} - target);
      if (err < best_err || (err == best_err && std::abs(q) < std::abs(best_q))) {
        best_err = err;
        best_q = q;
        best_r = r;
      }
    }
    recon = best_r;
    return best_q;
  }
};

PlaneTensor scale_residual(const PlaneTensor& coded, int comp, const ResidualScaler& scaler, Exec exec) {
  PlaneTensor out(coded.shape());
  const int C = coded.channels();
#pragma omp parallel for if (exec == Exec::kParallel)
  for (int c = 0; c < C; ++c) {
    for (int i = 0; i < coded.height(); ++i) {
      for (int j = 0; j < coded.width(); ++j) out(c, i, j) = scaler(comp, c, i, j, coded(c, i, j));
    }
  }
  return out;
}

std::vector<uint8_t> region_payload(const PlaneTensor& q, const PlaneTensor& sigma, const Rect& rect,
                                    const CubeFlags& cubes, const TableSet& tables, int32_t skip_threshold,
                                    int substreams) {
  const PlaneTensor qr = extract(q, rect);
  const PlaneTensor sr = extract(sigma, rect);
  const ResidualModel model{&tables.residual_tans, &tables.quantizer, skip_threshold, &cubes};
  std::vector<uint8_t> out = cubes.serialize();
  const std::vector<uint8_t> block = encode_residual_block(qr, sr, model, substreams);
  out.insert(out.end(), block.begin(), block.end());
  return out;
}

// Cube flags per region: a cube is forced on when a skipped position would
// otherwise drop a coded magnitude of 2 or more.
std::vector<CubeFlags> choose_cubes(const PlaneTensor& q, const PlaneTensor& sigma, std::span<const Rect> rects,
                                    int32_t skip_threshold) {
  std::vector<CubeFlags> out;
  for (const Rect& r : rects) {
    CubeFlags flags(Shape3{q.channels(), r.height, r.width});
    for (int c = 0; c < q.channels(); ++c) {
      for (int i = 0; i < r.height; ++i) {
        for (int j = 0; j < r.width; ++j) {
          if (sigma(c, r.top + i, r.left + j) < skip_threshold && std::abs(q(c, r.top + i, r.left + j)) >= 2) {
            flags.set(c, i, j);
          }
        }
      }
    }
    out.push_back(std::move(flags));
  }
  return out;
}

std::vector<int> region_of_uv(const Context& ctx) {
  std::vector<int> out(static_cast<std::size_t>(ctx.dims.hc) * ctx.dims.wc, 0);
  for (std::size_t r = 0; r < ctx.uv_rects.size(); ++r) {
    const Rect& rect = ctx.uv_rects[r];
    for (int i = rect.top; i < rect.bottom(); ++i) {
      for (int j = rect.left; j < rect.right(); ++j) out[static_cast<std::size_t>(i) * ctx.dims.wc + j] = static_cast<int>(r);
    }
  }
  return out;
}

bool skipped_at(const PlaneTensor& sigma, int32_t threshold, const std::vector<CubeFlags>* cubes,
                std::span<const Rect> rects, int region, int c, int i, int j) {
  if (sigma(c, i, j) >= threshold) return false;
  if (cubes == nullptr) return true;
  const Rect& r = rects[static_cast<std::size_t>(region)];
  return !(*cubes)[static_cast<std::size_t>(region)].get(c, i - r.top, j - r.left);
}

std::array<std::array<double, 3>, 3> invert3(const std::array<std::array<double, 3>, 3>& m) {
  const double det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
                     m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                     m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
  if (std::fabs(det) < 1e-9) throw Error("colour matrix is singular");
  std::array<std::array<double, 3>, 3> inv{};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      const int a = (j + 1) % 3, b = (j + 2) % 3, c = (i + 1) % 3, d = (i + 2) % 3;
      inv[i][j] = (m[a][c] * m[b][d] - m[a][d] * m[b][c]) / det;
    }
  }
  return inv;
}

RealTensor apply_inverse_matrix(const RealTensor& rgb, const ColourMatrix& cm) {
  std::array<std::array<double, 3>, 3> a{};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) a[i][j] = cm.a[i][j] / 4096.0;
  }
  const auto inv = invert3(a);
  RealTensor out(rgb.shape());
  for (int i = 0; i < rgb.height(); ++i) {
    for (int j = 0; j < rgb.width(); ++j) {
      double v[3];
      for (int k = 0; k < 3; ++k) v[k] = rgb(k, i, j) - cm.b[k] / 4096.0;
      for (int k = 0; k < 3; ++k) out(k, i, j) = inv[k][0] * v[0] + inv[k][1] * v[1] + inv[k][2] * v[2];
    }
  }
  return out;
}

Rect pixel_rect(const Rect& latent, int H, int W) {
  const int top = std::min(latent.top * kLatentStride, H);
  const int left = std::min(latent.left * kLatentStride, W);
  return Rect{top, left, std::min(latent.bottom() * kLatentStride, H) - top,
              std::min(latent.right() * kLatentStride, W) - left};
}

// Chroma resampling; with own-substream regions every region is resampled
// on its own so no sample crosses a region boundary.
RealTensor resample_regions(const RealTensor& uv, const Context& ctx, bool per_region, int to_v, int to_h, int out_h,
                            int out_w, Exec exec) {
  const Dims& d = ctx.dims;
  if (!per_region || ctx.grid.regions.size() <= 1) {
    return chroma_resample(uv, d.cv, d.ch, to_v, to_h, out_h, out_w, exec);
  }
  RealTensor out(uv.channels(), out_h, out_w);
  for (const Rect& region : ctx.grid.regions) {
    const Rect p = pixel_rect(region, d.H, d.W);
    const Rect src = RegionGrid::scale_down(p, d.cv, d.ch, d.Hc, d.Wc);
    const Rect dst = RegionGrid::scale_down(p, to_v, to_h, out_h, out_w);
    if (dst.empty()) continue;
    insert(out, chroma_resample(extract(uv, src), d.cv, d.ch, to_v, to_h, dst.height, dst.width, exec), dst.top,
           dst.left);
  }
  return out;
}

PlaneTensor decode_hyper_pair(std::span<const uint8_t> payload, std::size_t base, const Dims& d,
                              const TableSet& tables, PlaneTensor& z_uv, DecodeStats* stats) {
  std::size_t pos = 0;
  const uint32_t len_y = decode_varint(payload, pos, base);
  if (len_y > payload.size() - pos) throw FormatError("SOZ: luma hyper stream overruns the segment", base + pos);
  PlaneTensor z_y;
  try {
    z_y = decode_hyper(payload.subspan(pos, len_y), kLumaChannels, ceil_div(d.h, kHyperCell),
                       ceil_div(d.w, kHyperCell), tables.hyper_tans, stats);
  } catch (const FormatError& e) {
    throw FormatError(std::string("SOZ luma: ") + e.what(), base + pos);
  }
  pos += len_y;
  try {
    z_uv = decode_hyper(payload.subspan(pos), kChromaChannels, ceil_div(d.hc, kHyperCell), ceil_div(d.wc, kHyperCell),
                        tables.hyper_tans, stats);
  } catch (const FormatError& e) {
    throw FormatError(std::string("SOZ chroma: ") + e.what(), base + pos);
  }
  return z_y;
}

}  // namespace

void Image::validate() const {
  if (bitdepth < 8 || bitdepth > 16) throw Error("image bit depth must be 8..16");
  if ((sub_v != 1 && sub_v != 2) || (sub_h != 1 && sub_h != 2)) throw Error("image subsampling must be 1 or 2");
  if (space == ColorSpace::kRgb && (sub_v != 1 || sub_h != 1)) throw Error("RGB images cannot be subsampled");
  const int h = planes[0].height();
  const int w = planes[0].width();
  if (h < 1 || w < 1) throw Error("image must be at least 1x1");
  const int peak = (1 << bitdepth) - 1;
  for (int p = 0; p < 3; ++p) {
    const int eh = p == 0 ? h : ceil_div(h, sub_v);
    const int ew = p == 0 ? w : ceil_div(w, sub_h);
    if (planes[p].shape() != Shape3{1, eh, ew}) {
      throw Error("plane " + std::to_string(p) + " has shape " + planes[p].shape().str() + ", expected " +
                  Shape3{1, eh, ew}.str());
    }
    for (int32_t v : planes[p].data()) {
      if (v < 0 || v > peak) throw Error("sample out of range for the bit depth");
    }
  }
}

Image make_image(ColorSpace space, int height, int width, int bitdepth, int sub_v, int sub_h) {
  Image img;
  img.space = space;
  img.bitdepth = bitdepth;
  img.sub_v = sub_v;
  img.sub_h = sub_h;
  img.planes[0] = PlaneTensor(1, height, width);
  img.planes[1] = PlaneTensor(1, ceil_div(height, sub_v), ceil_div(width, sub_h));
  img.planes[2] = PlaneTensor(1, ceil_div(height, sub_v), ceil_div(width, sub_h));
  return img;
}

int hyper_step(int channel, int per_plane) { return channel % per_plane == 0 ? 16 : 4; }

PlaneTensor hyper_analysis(const PlaneTensor& latent, int per_plane) {
  const int C = latent.channels();
  const int h = latent.height();
  const int w = latent.width();
  PlaneTensor z(C, ceil_div(h, kHyperCell), ceil_div(w, kHyperCell));
  for (int c = 0; c < C; ++c) {
    const int64_t qz = hyper_step(c, per_plane);
    for (int zi = 0; zi < z.height(); ++zi) {
      for (int zj = 0; zj < z.width(); ++zj) {
        int64_t sum = 0;
        int64_t n = 0;
        for (int i = zi * kHyperCell; i < std::min(h, (zi + 1) * kHyperCell); ++i) {
          for (int j = zj * kHyperCell; j < std::min(w, (zj + 1) * kHyperCell); ++j) {
            sum += latent(c, i, j);
            ++n;
          }
        }
        z(c, zi, zj) = round_div(sum, n * qz * (1 << kLatentFracBits));
      }
    }
  }
  return z;
}

PlaneTensor hyper_prediction_primary(const PlaneTensor& z, int height, int width) {
  if (z.channels() != kLumaChannels) throw Error("hyper_prediction_primary: expected 160 channels");
  const int ph = ceil_div(height, 2);
  const int pw = ceil_div(width, 2);
  PlaneTensor p(kPredictionGroups * kLumaChannels, ph, pw);
  for (int c = 0; c < kLumaChannels; ++c) {
    const int32_t scale = hyper_step(c, kLumaChannels) << kLatentFracBits;
    for (int a = 0; a < ph; ++a) {
      for (int b = 0; b < pw; ++b) {
        const int32_t v = saturate_i32(int64_t{z(c, std::min(a / 2, z.height() - 1), std::min(b / 2, z.width() - 1))} * scale);
        for (int g = 0; g < kPredictionGroups; ++g) p(g * kLumaChannels + c, a, b) = v;
      }
    }
  }
  return p;
}

PlaneTensor hyper_prediction_secondary(const PlaneTensor& z, int height, int width) {
  if (z.channels() != kChromaChannels) throw Error("hyper_prediction_secondary: expected 96 channels");
  PlaneTensor p(kChromaChannels, height, width);
  for (int c = 0; c < kChromaChannels; ++c) {
    const int32_t scale = hyper_step(c, kChromaPlaneChannels) << kLatentFracBits;
    for (int i = 0; i < height; ++i) {
      for (int j = 0; j < width; ++j) {
        p(c, i, j) = saturate_i32(int64_t{z(c, std::min(i / kHyperCell, z.height() - 1),
                                            std::min(j / kHyperCell, z.width() - 1))} *
                                  scale);
      }
    }
  }
  return p;
}

PlaneTensor hyper_sigma(const PlaneTensor& z, int height, int width, int per_plane) {
  PlaneTensor s(z.channels(), height, width);
  for (int c = 0; c < z.channels(); ++c) {
    const int32_t base = sigma_base(c % per_plane);
    for (int i = 0; i < height; ++i) {
      for (int j = 0; j < width; ++j) {
        const int zi = std::min(i / kHyperCell, z.height() - 1);
        const int zj = std::min(j / kHyperCell, z.width() - 1);
        const int64_t here = z(c, zi, zj);
        const int64_t right = z(c, zi, std::min(zj + 1, z.width() - 1));
        const int64_t down = z(c, std::min(zi + 1, z.height() - 1), zj);
        const int64_t activity = std::min<int64_t>(8, std::llabs(right - here) + std::llabs(down - here));
        s(c, i, j) = base + static_cast<int32_t>(11 * activity);
      }
    }
  }
  return s;
}

int substreams_kept(int count, double keep_fraction) {
  if (!(keep_fraction >= 0.0 && keep_fraction <= 1.0)) throw Error("keep fraction must be in [0, 1]");
  return std::clamp(static_cast<int>(std::ceil(keep_fraction * count - 1e-9)), 0, count);
}

std::vector<uint8_t> encode(const Image& image, const EncodeConfig& config) {
  image.validate();
  const TableSet& tables = tables_or_default(config.tables);
  const Exec exec = config.exec;
  if ((config.chroma_v != 1 && config.chroma_v != 2) || (config.chroma_h != 1 && config.chroma_h != 2)) {
    throw Error("coded chroma subsampling must be 1 or 2");
  }
  const int idx = config.colour_transform_idx >= 0 ? config.colour_transform_idx
                                                   : (image.space == ColorSpace::kRgb ? 0 : 1);
  if (idx > 2) throw Error("colour_transform_idx must be 0..2");
  if (idx == 2 && !config.colour_matrix) throw Error("colour_transform_idx 2 needs a colour matrix");
  int out_v = config.output_v;
  int out_h = config.output_h;
  if (idx != 1) {
    if ((out_v != 0 && out_v != 1) || (out_h != 0 && out_h != 1)) {
      throw Error("colour conversion produces full-resolution output");
    }
    out_v = out_h = 1;
  } else if (out_v == 0 || out_h == 0) {
    out_v = image.space == ColorSpace::kYcbcr ? image.sub_v : config.chroma_v;
    out_h = image.space == ColorSpace::kYcbcr ? image.sub_h : config.chroma_h;
  }

  const int H0 = image.height();
  const int W0 = image.width();
  const int H = config.pad_to_64 ? ceil_div(H0, 64) * 64 : H0;
  const int W = config.pad_to_64 ? ceil_div(W0, 64) * 64 : W0;
  if (H > 65535 || W > 65535) throw Error("picture too large");
  const int cv = config.chroma_v;
  const int ch = config.chroma_h;
  const int b = image.bitdepth;

  // Coded component planes.
  PlaneTensor luma = image.planes[0];
  PlaneTensor chroma;
  if (image.space == ColorSpace::kRgb) {
    RealTensor rgb = normalize_samples(stack({&image.planes[0], &image.planes[1], &image.planes[2]}), b);
    RealTensor ycc = idx == 0 ? rgb_to_ycbcr(rgb, exec) : (idx == 2 ? apply_inverse_matrix(rgb, *config.colour_matrix) : rgb);
    luma = scale_clip_output(channels(ycc, 0, 1), b, exec);
    chroma = scale_clip_output(
        chroma_resample(channels(ycc, 1, 2), 1, 1, cv, ch, ceil_div(H0, cv), ceil_div(W0, ch), exec), b, exec);
  } else if (image.sub_v == cv && image.sub_h == ch) {
    chroma = stack({&image.planes[1], &image.planes[2]});
  } else {
    const RealTensor uv = normalize_samples(stack({&image.planes[1], &image.planes[2]}), b);
    chroma = scale_clip_output(
        chroma_resample(uv, image.sub_v, image.sub_h, cv, ch, ceil_div(H0, cv), ceil_div(W0, ch), exec), b, exec);
  }
  luma = pad_replicate(luma, H, W);
  chroma = pad_replicate(chroma, ceil_div(H, cv), ceil_div(W, ch));

  PictureHeader header;
  header.height = static_cast<uint32_t>(H);
  header.width = static_cast<uint32_t>(W);
  header.bitdepth = static_cast<uint8_t>(b);
  header.s_ver_minus1 = static_cast<uint8_t>(out_v - 1);
  header.s_hor_minus1 = static_cast<uint8_t>(out_h - 1);
  header.c_ver_minus1 = static_cast<uint8_t>(cv - 1);
  header.c_hor_minus1 = static_cast<uint8_t>(ch - 1);
  header.model_id = static_cast<uint8_t>(config.model_id);
  header.colour_transform_idx = static_cast<uint8_t>(idx);
  if (idx == 2) header.colour_matrix = config.colour_matrix;
  header.region_partitioning_flag = config.region_partitioning;
  header.region_residual_in_its_own_substream_flag = config.region_partitioning && config.own_substream;
  if (config.region_partitioning) {
    header.region_height = static_cast<uint16_t>(config.region_height);
    header.region_width = static_cast<uint16_t>(config.region_width);
  }
  header.synthesis_tile_enable = config.tile_enable;
  if (config.tile_enable[0] || config.tile_enable[1]) {
    header.tile_height = static_cast<uint16_t>(config.tile_height);
    header.tile_width = static_cast<uint16_t>(config.tile_width);
  }
  header.substream_count = static_cast<uint16_t>(config.substream_count);
  header.grfs_enable_flag = config.grfs_enable;
  header.rvs_enable_flag = config.rvs_enable;
  if (config.grfs_enable[0]) header.grfs_y = config.grfs_y;
  if (config.grfs_enable[1]) header.grfs_uv = config.grfs_uv;
  header.beta_displacement_log = {static_cast<int16_t>(config.beta[0]), static_cast<int16_t>(config.beta[1])};
  header.gain_3d_enable_flag = config.gain3d.has_value();
  header.skip_threshold_idx = static_cast<uint8_t>(config.skip_threshold_idx);
  header.diff_display_img_height = static_cast<uint8_t>(H - H0);
  header.diff_display_img_width = static_cast<uint8_t>(W - W0);
  validate(header);
  const Dims d = dims_of(header);
  const RegionGrid grid = build_region_grid(header, d.h, d.w);
  if (config.gain3d && config.gain3d->shape() != Shape3{1, d.h, d.w}) {
    throw Error("quality map must be 1x" + std::to_string(d.h) + "x" + std::to_string(d.w));
  }

  const PlaneTensor y_lat = analysis(luma, b, kLumaChannels, exec);
  const PlaneTensor uv_lat = analysis(chroma, b, kChromaPlaneChannels, exec);
  const PlaneTensor z_y = hyper_analysis(y_lat, kLumaChannels);
  const PlaneTensor z_uv = hyper_analysis(uv_lat, kChromaPlaneChannels);
  const Context ctx = derive_context(header, grid, z_y, z_uv, config.gain3d, tables, exec);
  const ResidualScaler scaler{ctx, tables, header.model_id};
  const int32_t threshold = tables.skip_ladder[header.skip_threshold_idx];

  // Primary: MCM quantisation, first without skipping to find the cubes to
  // force on, then for real.
  const McmSchedule schedule = mcm_schedule(d.h, d.w, config.phase_order);
  const McmPredictor predictor = predictor_by_name(config.predictor);
  const std::vector<int> labels = header.region_residual_in_its_own_substream_flag ? grid.labels() : std::vector<int>{};
  PlaneTensor q_y(y_lat.shape());
  const auto quantize_y = [&](const std::vector<CubeFlags>* cubes) {
    return [&, cubes](int c, int i, int j, int32_t target) -> int32_t {
      if (cubes != nullptr &&
          skipped_at(ctx.sigma_y, threshold, cubes, grid.regions, grid.region_of(i, j), c, i, j)) {
        q_y(c, i, j) = 0;
        return 0;
      }
      int32_t recon = 0;
      q_y(c, i, j) = scaler.quantize(0, c, i, j, target, recon);
      return recon;
    };
  };
  mcm_encode(y_lat, ctx.p_y, predictor, schedule, quantize_y(nullptr), labels, exec);
  const std::vector<CubeFlags> cubes_y = choose_cubes(q_y, ctx.sigma_y, grid.regions, threshold);
  mcm_encode(y_lat, ctx.p_y, predictor, schedule, quantize_y(&cubes_y), labels, exec);

  // Secondary: r = y - p.
  PlaneTensor q_uv(uv_lat.shape());
  for (int c = 0; c < q_uv.channels(); ++c) {
    for (int i = 0; i < d.hc; ++i) {
      for (int j = 0; j < d.wc; ++j) {
        int32_t recon = 0;
        q_uv(c, i, j) =
            scaler.quantize(1, c, i, j, saturate_i32(int64_t{uv_lat(c, i, j)} - ctx.p_uv(c, i, j)), recon);
      }
    }
  }
  const std::vector<CubeFlags> cubes_uv = choose_cubes(q_uv, ctx.sigma_uv, ctx.uv_rects, threshold);
  const std::vector<int> uv_region = region_of_uv(ctx);
  for (int c = 0; c < q_uv.channels(); ++c) {
    for (int i = 0; i < d.hc; ++i) {
      for (int j = 0; j < d.wc; ++j) {
        const int r = uv_region[static_cast<std::size_t>(i) * d.wc + j];
        if (skipped_at(ctx.sigma_uv, threshold, &cubes_uv, ctx.uv_rects, r, c, i, j)) q_uv(c, i, j) = 0;
      }
    }
  }

  std::vector<Segment> segments;
  segments.push_back({marker::kSOC, std::nullopt, {}});
  segments.push_back({marker::kPIH, std::nullopt, encode_picture_header(header)});
  if (config.tools.any_enabled()) segments.push_back({marker::kTOH, std::nullopt, encode_tools_header(config.tools)});
  {
    std::vector<uint8_t> soz;
    const std::vector<uint8_t> zy = encode_hyper(z_y, tables.hyper_tans);
    const std::vector<uint8_t> zuv = encode_hyper(z_uv, tables.hyper_tans);
    append_varint(soz, zy.size());
    soz.insert(soz.end(), zy.begin(), zy.end());
    soz.insert(soz.end(), zuv.begin(), zuv.end());
    segments.push_back({marker::kSOZ, std::nullopt, std::move(soz)});
  }
  if (config.gain3d) segments.push_back({marker::kSOQ, std::nullopt, encode_quality_map(*config.gain3d, tables.hyper_tans)});
  const int count = header.substream_count;
  for (int r = 0; r < grid.region_count(); ++r) {
    segments.push_back({marker::kSORp, static_cast<uint8_t>(r),
                        region_payload(q_y, ctx.sigma_y, grid.regions[r], cubes_y[r], tables, threshold, count)});
  }
  for (int r = 0; r < grid.region_count(); ++r) {
    segments.push_back({marker::kSORs, static_cast<uint8_t>(r),
                        region_payload(q_uv, ctx.sigma_uv, ctx.uv_rects[r], cubes_uv[r], tables, threshold, count)});
  }
  segments.push_back({marker::kEOC, std::nullopt, {}});
  return write_codestream(segments);
}

EntropyDecoded decode_entropy(std::span<const uint8_t> codestream, const DecodeOptions& options) {
  const TableSet& tables = tables_or_default(options.tables);
  const ParsedCodestream parsed = parse_codestream_detailed(codestream);
  validate_segments(parsed.segments, parsed.records);
  transform_for_decoder(options.decoder_id);
  const auto& segs = parsed.segments;
  EntropyDecoded out;
  out.header = decode_picture_header(segs[1].payload, parsed.records[1].payload_offset);
  out.tools = tools_header_from(segs);
  const PictureHeader& header = out.header;
  if (header.colour_transform_idx != 1 && (header.s_ver_minus1 || header.s_hor_minus1)) {
    throw FormatError("colour conversion requires 4:4:4 output", parsed.records[1].payload_offset);
  }
  const Dims d = dims_of(header);
  if (header.diff_display_img_height >= d.H || header.diff_display_img_width >= d.W) {
    throw FormatError("display window is empty", parsed.records[1].payload_offset);
  }
  out.grid = build_region_grid(header, d.h, d.w);

  std::map<uint16_t, std::size_t> first;
  std::array<std::map<int, std::size_t>, 2> residual_segments;
  for (std::size_t k = 0; k < segs.size(); ++k) {
    first.emplace(segs[k].marker, k);
    if (segs[k].region_idx) {
      const int comp = segs[k].marker == marker::kSORp ? 0 : 1;
      if (*segs[k].region_idx >= out.grid.region_count()) {
        throw FormatError("region_idx " + std::to_string(*segs[k].region_idx) + " exceeds the region count " +
                              std::to_string(out.grid.region_count()),
                          parsed.records[k].offset);
      }
      residual_segments[comp][*segs[k].region_idx] = k;
    }
  }

  const std::size_t soz = first.at(marker::kSOZ);
  out.z_y = decode_hyper_pair(segs[soz].payload, parsed.records[soz].payload_offset, d, tables, out.z_uv, &out.stats);
  if (header.gain_3d_enable_flag) {
    const auto it = first.find(marker::kSOQ);
    if (it == first.end()) throw FormatError("gain_3D_enable_flag is set but no SOQ segment is present");
    out.gain3d = decode_quality_map(segs[it->second].payload, d.h, d.w, tables.hyper_tans,
                                    parsed.records[it->second].payload_offset);
  }
  const Context ctx = derive_context(header, out.grid, out.z_y, out.z_uv, out.gain3d, tables, options.exec);
  out.sigma_y = ctx.sigma_y;
  out.sigma_uv = ctx.sigma_uv;
  out.pooled_y = ctx.pooled_y;
  out.pooled_uv = ctx.pooled_uv;
  out.residual_y = PlaneTensor(kLumaChannels, d.h, d.w);
  out.residual_uv = PlaneTensor(kChromaChannels, d.hc, d.wc);

  std::vector<int> selected = options.regions;
  if (selected.empty()) {
    for (int r = 0; r < out.grid.region_count(); ++r) selected.push_back(r);
  }
  std::sort(selected.begin(), selected.end());
  selected.erase(std::unique(selected.begin(), selected.end()), selected.end());
  for (int r : selected) {
    if (r < 0 || r >= out.grid.region_count()) throw Error("requested region " + std::to_string(r) + " does not exist");
  }
  const int count = header.substream_count;
  const int keep = substreams_kept(count, options.keep_fraction);
  const int32_t threshold = tables.skip_ladder[header.skip_threshold_idx];

  for (int r : selected) {
    try {
      for (int comp = 0; comp < 2; ++comp) {
        const auto it = residual_segments[comp].find(r);
        if (it == residual_segments[comp].end()) {
          throw FormatError(std::string(comp == 0 ? "SORp" : "SORs") + " missing for region " + std::to_string(r));
        }
        const Segment& seg = segs[it->second];
        const std::size_t base = parsed.records[it->second].payload_offset + 1;
        const Rect rect = comp == 0 ? out.grid.regions[r] : ctx.uv_rects[r];
        const PlaneTensor& sigma = comp == 0 ? ctx.sigma_y : ctx.sigma_uv;
        PlaneTensor& residual = comp == 0 ? out.residual_y : out.residual_uv;
        const Shape3 shape{sigma.channels(), rect.height, rect.width};
        const CubeFlags cubes = CubeFlags::parse(shape, seg.payload, base);
        const ResidualModel model{&tables.residual_tans, &tables.quantizer, threshold, &cubes};
        DecodeStats stats;
        const PlaneTensor part =
            decode_residual_block(std::span<const uint8_t>(seg.payload).subspan(cubes.byte_size()),
                                  extract(sigma, rect), model, count, keep, options.exec, &stats,
                                  base + cubes.byte_size());
        insert(residual, part, rect.top, rect.left);
        out.stats.merge(stats);
      }
      out.decoded_regions.push_back(r);
    } catch (const FormatError& e) {
      if (!options.conceal) throw;
      insert(out.residual_y, PlaneTensor(kLumaChannels, out.grid.regions[r].height, out.grid.regions[r].width),
             out.grid.regions[r].top, out.grid.regions[r].left);
      insert(out.residual_uv, PlaneTensor(kChromaChannels, ctx.uv_rects[r].height, ctx.uv_rects[r].width),
             ctx.uv_rects[r].top, ctx.uv_rects[r].left);
      out.concealed_regions.push_back(r);
      out.diagnostics.push_back("region " + std::to_string(r) + ": " + e.what());
    }
  }
  return out;
}

Latents reconstruct_latents(const EntropyDecoded& decoded, const DecodeOptions& options) {
  const TableSet& tables = tables_or_default(options.tables);
  const PictureHeader& header = decoded.header;
  const Context ctx = derive_context(header, decoded.grid, decoded.z_y, decoded.z_uv, decoded.gain3d, tables,
                                     options.exec);
  const ResidualScaler scaler{ctx, tables, header.model_id};
  const PlaneTensor r_y = scale_residual(decoded.residual_y, 0, scaler, options.exec);
  const PlaneTensor r_uv = scale_residual(decoded.residual_uv, 1, scaler, options.exec);
  const std::vector<int> labels =
      header.region_residual_in_its_own_substream_flag ? decoded.grid.labels() : std::vector<int>{};
  Latents out;
  out.y = mcm_reconstruct(r_y, ctx.p_y, predictor_by_name(options.predictor),
                          mcm_schedule(ctx.dims.h, ctx.dims.w, options.phase_order), labels, options.exec);
  out.uv = reconstruct_secondary(r_uv, ctx.p_uv);
  if (options.apply_tools && decoded.tools.lsbs_enable_flag[0]) {
    out.y = lsbs_apply(out.y, r_y, ctx.pooled_y, tables.lsbs, header.model_id, options.exec);
  }
  if (options.apply_tools && decoded.tools.lsbs_enable_flag[1]) {
    out.uv = lsbs_apply(out.uv, r_uv, ctx.pooled_uv, tables.lsbs, header.model_id, options.exec);
  }
  return out;
}

Image reconstruct(const EntropyDecoded& decoded, const DecodeOptions& options) {
  const PictureHeader& header = decoded.header;
  const TransformPair pair = transform_for_decoder(options.decoder_id);
  const Latents lat = reconstruct_latents(decoded, options);
  const Dims d = dims_of(header);
  const int b = header.bitdepth;
  const auto tile = [&](int comp, int fv, int fh) {
    if (header.synthesis_tile_enable[comp]) {
      return std::pair<int, int>{ceil_div(header.tile_height, fv), ceil_div(header.tile_width, fh)};
    }
    return std::pair<int, int>{pair.tile_height, pair.tile_width};
  };
  const auto [ty, tx] = tile(0, 1, 1);
  const auto [tcy, tcx] = tile(1, d.cv, d.ch);
  const PlaneTensor luma = synthesis(lat.y, 1, d.H, d.W, b, ty, tx, options.exec);
  const PlaneTensor chroma = synthesis(lat.uv, 2, d.Hc, d.Wc, b, tcy, tcx, options.exec);

  Context geom;
  geom.dims = d;
  geom.grid = decoded.grid;
  const bool per_region = header.region_residual_in_its_own_substream_flag;
  const RealTensor uv = normalize_samples(chroma, b);
  const int Ho = d.H - header.diff_display_img_height;
  const int Wo = d.W - header.diff_display_img_width;

  Image img;
  img.bitdepth = b;
  if (header.colour_transform_idx == 1) {
    const int sv = header.output_factor_v();
    const int sh = header.output_factor_h();
    img.space = ColorSpace::kYcbcr;
    img.sub_v = sv;
    img.sub_h = sh;
    const PlaneTensor out_uv = scale_clip_output(
        resample_regions(uv, geom, per_region, sv, sh, ceil_div(d.H, sv), ceil_div(d.W, sh), options.exec), b,
        options.exec);
    img.planes[0] = crop_display_window(luma, header.diff_display_img_width, header.diff_display_img_height);
    for (int p = 0; p < 2; ++p) {
      img.planes[p + 1] = extract(channel(out_uv, p), Rect{0, 0, ceil_div(Ho, sv), ceil_div(Wo, sh)});
    }
    return img;
  }
  const RealTensor full_uv = resample_regions(uv, geom, per_region, 1, 1, d.H, d.W, options.exec);
  RealTensor ycc(3, d.H, d.W);
  const RealTensor yn = normalize_samples(luma, b);
  std::copy(yn.data().begin(), yn.data().end(), ycc.plane(0).begin());
  std::copy(full_uv.data().begin(), full_uv.data().end(), ycc.plane(1).begin());
  const PlaneTensor rgb = scale_clip_output(
      convert_color(ycc, color_transform_from(header, options.color_variant), options.exec), b, options.exec);
  const PlaneTensor cropped = crop_display_window(rgb, header.diff_display_img_width, header.diff_display_img_height);
  img.space = ColorSpace::kRgb;
  for (int p = 0; p < 3; ++p) img.planes[p] = channel(cropped, p);
  return img;
}

Image decode(std::span<const uint8_t> codestream, const DecodeOptions& options) {
  return reconstruct(decode_entropy(codestream, options), options);
}

Image progressive_decode(std::span<const uint8_t> codestream, double keep_fraction, DecodeOptions options) {
  options.keep_fraction = keep_fraction;
  return decode(codestream, options);
}

}  // namespace jpegai
