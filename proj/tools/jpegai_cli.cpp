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

// Command-line front end. Every result is printed as one record per line:
// a record type followed by key=value fields.

#include <omp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "jpegai/config.hpp"
#include "jpegai/container.hpp"
#include "jpegai/entropy.hpp"
#include "jpegai/error.hpp"
#include "jpegai/headers.hpp"
#include "jpegai/image_io.hpp"
#include "jpegai/pipeline.hpp"
#include "jpegai/tables.hpp"
#include "jpegai/transform.hpp"
#include "symbol_stream.hpp"

namespace {

using namespace jpegai;
namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitFormat = 2;
constexpr int kExitIo = 3;
constexpr const char* kTablesEnv = "JPEGAI_TABLES";

struct PipelineFlags {
  std::vector<std::pair<std::string, CLI::Option*>> options;
  std::map<std::string, std::string> values;
  std::string config_path;
  bool own_substream = false;
  bool conceal = false;
  bool no_pad = false;
  bool no_tools = false;
  CLI::Option* own_substream_opt = nullptr;
  CLI::Option* conceal_opt = nullptr;
  CLI::Option* no_pad_opt = nullptr;
};

void add_value(CLI::App* cmd, PipelineFlags& f, const std::string& key, const std::string& help) {
  f.options.emplace_back(key, cmd->add_option("--" + key, f.values[key], help));
}

void add_common(CLI::App* cmd, PipelineFlags& f) {
  cmd->add_option("--config", f.config_path, "key=value pipeline config file");
  add_value(cmd, f, "tables", "table file (overrides $JPEGAI_TABLES)");
  add_value(cmd, f, "threads", "worker threads, 0 = all cores, 1 = serial kernels");
}

void add_encode_options(CLI::App* cmd, PipelineFlags& f) {
  add_value(cmd, f, "model-id", "model index 0..3");
  add_value(cmd, f, "beta", "beta displacement, n or luma,chroma");
  add_value(cmd, f, "tools", "comma list: lsbs, rvs, grfs, efe-linear, icci, efe-nonlinear, lef, none");
  add_value(cmd, f, "substreams", "residual substreams per region 1..256");
  add_value(cmd, f, "chroma", "coded chroma format 420, 422 or 444");
  add_value(cmd, f, "colour-transform", "0 fixed, 1 none, 2 matrix");
  add_value(cmd, f, "skip-threshold-idx", "skip ladder index 0..7");
  add_value(cmd, f, "region-size", "region size HxW in latent units");
  add_value(cmd, f, "tile-size", "synthesis tile size HxW in latent units");
  add_value(cmd, f, "predictor", "MCM predictor: none or neighbour-mean");
  add_value(cmd, f, "phase-order", "MCM phase order, e.g. 00,11,01,10");
  add_value(cmd, f, "quality-map", "uniform 3-D gain value");
  f.own_substream_opt = cmd->add_flag("--own-substream", f.own_substream, "independently decodable regions");
  f.no_pad_opt = cmd->add_flag("--no-pad", f.no_pad, "do not pad the coded picture to a multiple of 64");
}

void add_decode_options(CLI::App* cmd, PipelineFlags& f) {
  add_value(cmd, f, "decoder-id", "synthesis operating point 0..2");
  add_value(cmd, f, "regions", "comma list of region indices to decode");
  add_value(cmd, f, "progressive", "fraction of residual substreams to decode");
  add_value(cmd, f, "color-variant", "fixed conversion: bt709 or printed");
  add_value(cmd, f, "predictor", "MCM predictor: none or neighbour-mean");
  add_value(cmd, f, "phase-order", "MCM phase order, e.g. 00,11,01,10");
  f.conceal_opt = cmd->add_flag("--conceal", f.conceal, "zero-fill regions whose residual is damaged");
  cmd->add_flag("--no-tools", f.no_tools, "skip the optional tools signalled in TOH");
}

PipelineConfig resolve_config(const PipelineFlags& f) {
  PipelineConfig cfg;
  if (!f.config_path.empty()) apply_config(cfg, load_config_file(f.config_path));
  if (const char* env = std::getenv(kTablesEnv); env != nullptr && *env != '\0') cfg.tables_path = env;
  for (const auto& [key, opt] : f.options) {
    if (opt->count() > 0) apply_config_entry(cfg, key, f.values.at(key));
  }
  if (f.own_substream_opt != nullptr && f.own_substream_opt->count() > 0) cfg.encode.own_substream = f.own_substream;
  if (f.no_pad_opt != nullptr && f.no_pad_opt->count() > 0) cfg.encode.pad_to_64 = !f.no_pad;
  if (f.conceal_opt != nullptr && f.conceal_opt->count() > 0) cfg.decode.conceal = f.conceal;
  if (f.no_tools) cfg.decode.apply_tools = false;

  static TableSet loaded;
  const TableSet* tables = &default_tables();
  if (!cfg.tables_path.empty()) {
    loaded = load_tables_file(cfg.tables_path);
    tables = &loaded;
  }
  cfg.encode.tables = cfg.decode.tables = tables;
  if (cfg.threads > 0) omp_set_num_threads(cfg.threads);
  const Exec exec = cfg.threads == 1 ? Exec::kSerial : Exec::kParallel;
  cfg.encode.exec = cfg.decode.exec = exec;
  return cfg;
}

std::span<const uint8_t> as_bytes(const std::string& s) {
  return {reinterpret_cast<const uint8_t*>(s.data()), s.size()};
}

std::string hex16(uint16_t v) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "0x%04x", v);
  return buf;
}

std::string fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

template <typename T>
std::string join(const std::vector<T>& v) {
  std::string out;
  for (std::size_t k = 0; k < v.size(); ++k) out += (k ? "," : "") + std::to_string(v[k]);
  return out.empty() ? "-" : out;
}

int run_encode(const std::string& in, const std::string& out, const std::string& yuv_desc, const PipelineFlags& f) {
  PipelineConfig cfg = resolve_config(f);
  const Image img = read_image(in, yuv_desc);
  finalize_for_image(cfg, img.height(), img.width());
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<uint8_t> bytes = encode(img, cfg.encode);
  const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  write_file(out, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
  std::cout << "encoded input=" << in << " output=" << out << " width=" << img.width() << " height=" << img.height()
            << " bytes=" << bytes.size() << " bpp=" << fixed(8.0 * bytes.size() / (double(img.width()) * img.height()))
            << " ms=" << fixed(ms, 2) << "\n";
  return kExitOk;
}

int run_decode(const std::string& in, const std::string& out, const PipelineFlags& f) {
  const PipelineConfig cfg = resolve_config(f);
  const std::string data = read_file(in);
  const auto t0 = std::chrono::steady_clock::now();
  const EntropyDecoded ed = decode_entropy(as_bytes(data), cfg.decode);
  const Image img = reconstruct(ed, cfg.decode);
  const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  write_image(out, img);
  for (const std::string& d : ed.diagnostics) std::cerr << "warning: " << d << "\n";
  std::cout << "decoded input=" << in << " output=" << out << " width=" << img.width() << " height=" << img.height()
            << " space=" << (img.space == ColorSpace::kRgb ? "rgb" : "ycbcr") << " regions=" << join(ed.decoded_regions)
            << " concealed=" << join(ed.concealed_regions) << " symbols=" << ed.stats.symbols_decoded
            << " skipped=" << ed.stats.positions_skipped << " ms=" << fixed(ms, 2) << "\n";
  return kExitOk;
}

void print_headers(const ParsedCodestream& parsed) {
  const PictureHeader h = decode_picture_header(parsed.segments[1].payload, parsed.records[1].payload_offset);
  std::cout << "picture height=" << h.height << " width=" << h.width << " bitdepth=" << int(h.bitdepth)
            << " stream_profile=" << int(h.stream_profile_id) << " decoder_profile=" << int(h.decoder_profile_id)
            << " output_subsampling=" << h.output_factor_v() << "x" << h.output_factor_h()
            << " coded_subsampling=" << h.chroma_factor_v() << "x" << h.chroma_factor_h()
            << " model_id=" << int(h.model_id) << " colour_transform=" << int(h.colour_transform_idx)
            << " region_partitioning=" << h.region_partitioning_flag
            << " own_substream=" << h.region_residual_in_its_own_substream_flag
            << " region=" << h.region_height << "x" << h.region_width << " tile_enable=" << h.synthesis_tile_enable[0]
            << "," << h.synthesis_tile_enable[1] << " tile=" << h.tile_height << "x" << h.tile_width
            << " substreams=" << h.substream_count << " grfs=" << h.grfs_enable_flag[0] << "," << h.grfs_enable_flag[1]
            << " rvs=" << h.rvs_enable_flag[0] << "," << h.rvs_enable_flag[1] << " beta=" << h.beta_displacement_log[0]
            << "," << h.beta_displacement_log[1] << " gain3d=" << h.gain_3d_enable_flag
            << " skip_threshold_idx=" << int(h.skip_threshold_idx) << " display_diff=" << int(h.diff_display_img_height)
            << "x" << int(h.diff_display_img_width) << "\n";
  const ToolsHeader t = tools_header_from(parsed.segments);
  std::cout << "tools present=" << (find_segment(parsed.segments, marker::kTOH) != nullptr)
            << " lsbs=" << t.lsbs_enable_flag[0] << "," << t.lsbs_enable_flag[1]
            << " efe_linear=" << t.efe_linear.enabled << " icci=" << t.icci.enabled
            << " efe_nonlinear=" << t.efe_nonlinear.enabled << " lef=" << t.lef.enabled << "\n";

  const int lh = ceil_div(int(h.height), kLatentStride);
  const int lw = ceil_div(int(h.width), kLatentStride);
  const int hc = ceil_div(ceil_div(int(h.height), h.chroma_factor_v()), kLatentStride);
  const int wc = ceil_div(ceil_div(int(h.width), h.chroma_factor_h()), kLatentStride);
  const RegionGrid grid = build_region_grid(h, lh, lw);
  for (std::size_t k = 0; k < parsed.segments.size(); ++k) {
    const Segment& s = parsed.segments[k];
    const std::size_t base = parsed.records[k].payload_offset + (s.region_idx ? 1 : 0);
    if (s.marker == marker::kSOZ) {
      std::size_t pos = 0;
      const uint32_t len = decode_varint(s.payload, pos, base);
      std::cout << "hyper luma_bytes=" << len << " chroma_bytes=" << s.payload.size() - pos - std::min<std::size_t>(len, s.payload.size() - pos) << "\n";
    } else if (s.marker == marker::kSOQ) {
      std::size_t pos = 0;
      const uint32_t qh = decode_varint(s.payload, pos, base);
      const uint32_t qw = decode_varint(s.payload, pos, base);
      std::cout << "quality_map height=" << qh << " width=" << qw << "\n";
    } else if (s.region_idx) {
      if (*s.region_idx >= grid.region_count()) throw FormatError("region_idx outside the region grid", parsed.records[k].offset);
      const bool primary = s.marker == marker::kSORp;
      const Rect r = primary ? grid.regions[*s.region_idx]
                             : RegionGrid::scale_down(grid.regions[*s.region_idx], h.chroma_factor_v(),
                                                      h.chroma_factor_h(), hc, wc);
      const CubeFlags cubes = CubeFlags::parse(Shape3{primary ? kLumaChannels : kChromaChannels, r.height, r.width},
                                               s.payload, base);
      const auto block = std::span<const uint8_t>(s.payload).subspan(cubes.byte_size());
      const SubstreamLayout layout = read_substream_layout(block, h.substream_count, base + cubes.byte_size());
      std::vector<uint32_t> sizes;
      for (int p = 0; p < layout.count; ++p) {
        const uint32_t end = p + 1 < layout.count ? layout.offsets[p + 1] : static_cast<uint32_t>(block.size());
        sizes.push_back(end - layout.offsets[p]);
      }
      std::cout << "substreams marker=" << marker_name(s.marker) << " region=" << int(*s.region_idx)
                << " latent=" << r.height << "x" << r.width << " cube_flags=" << cubes.set_count() << "/"
                << cubes.cube_count() << " count=" << layout.count << " offsets=" << join(layout.offsets)
                << " sizes=" << join(sizes) << "\n";
    }
  }
}

int run_inspect(const std::string& in) {
  const std::string data = read_file(in);
  const ParsedCodestream parsed = parse_codestream_detailed(as_bytes(data));
  for (std::size_t k = 0; k < parsed.records.size(); ++k) {
    const SegmentRecord& r = parsed.records[k];
    const std::size_t end = k + 1 < parsed.records.size() ? parsed.records[k + 1].offset : data.size();
    std::cout << "segment index=" << k << " marker=" << marker_name(r.marker) << " code=" << hex16(r.marker)
              << " offset=" << r.offset << " length=" << r.length
              << " region=" << (r.region_idx ? std::to_string(*r.region_idx) : "-")
              << " share=" << fixed(double(end - r.offset) / double(data.size())) << "\n";
  }
  print_headers(parsed);
  return kExitOk;
}

struct Moments {
  double mean = 0;
  double stddev = 0;
};

Moments moments(const std::vector<double>& v) {
  Moments m;
  m.mean = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
  double ss = 0;
  for (double x : v) ss += (x - m.mean) * (x - m.mean);
  m.stddev = v.size() > 1 ? std::sqrt(ss / (v.size() - 1)) : 0.0;
  return m;
}

template <typename F>
double time_ms(F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

int run_bench(const std::string& dir, int runs, const PipelineFlags& f) {
  PipelineConfig cfg = resolve_config(f);
  if (!fs::is_directory(dir)) throw IoError("corpus directory '" + dir + "' does not exist");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string ext = entry.path().extension().string();
    if (entry.is_regular_file() && (ext == ".ppm" || ext == ".pgm" || ext == ".pnm" || ext == ".yuv")) {
      files.push_back(entry.path());
    }
  }
  if (files.empty()) throw Error("corpus '" + dir + "' has no .ppm, .pgm or .yuv images");
  std::sort(files.begin(), files.end());
  runs = std::max(runs, 5);
  for (const fs::path& path : files) {
    const Image img = read_image(path.string());
    finalize_for_image(cfg, img.height(), img.width());
    const double mp = double(img.width()) * img.height() / 1e6;
    std::vector<uint8_t> bytes = encode(img, cfg.encode);  // warm-up
    decode(bytes, cfg.decode);
    std::vector<double> enc;
    std::vector<double> dec;
    for (int r = 0; r < runs; ++r) {
      enc.push_back(time_ms([&] { bytes = encode(img, cfg.encode); }) / mp);
      dec.push_back(time_ms([&] { decode(bytes, cfg.decode); }) / mp);
    }
    const Moments e = moments(enc);
    const Moments d = moments(dec);
    std::cout << "bench file=" << path.filename().string() << " width=" << img.width() << " height=" << img.height()
              << " bytes=" << bytes.size() << " runs=" << runs << " encode_ms_per_mp=" << fixed(e.mean, 3)
              << " encode_ms_per_mp_stddev=" << fixed(e.stddev, 3) << " decode_ms_per_mp=" << fixed(d.mean, 3)
              << " decode_ms_per_mp_stddev=" << fixed(d.stddev, 3) << "\n";
  }

  // Single-threaded entropy decode of a fixed symbol stream; one symbol
  // counts as one byte.
  const TableSet& tables = *cfg.decode.tables;
  const bench::SymbolStream stream = bench::make_symbol_stream(64, 128, 128);
  const ResidualModel model = bench::stream_model(tables);
  const std::vector<uint8_t> coded = tans_encode_plane(stream.residual, stream.sigma, model);
  std::vector<double> rates;
  for (int r = 0; r < runs; ++r) {
    const double ms = time_ms([&] { tans_decode_plane(coded, stream.sigma, model); });
    rates.push_back(double(stream.residual.size()) / (ms * 1e3));
  }
  const Moments m = moments(rates);
  std::cout << "entropy symbols=" << stream.residual.size() << " bytes=" << coded.size()
            << " mb_per_s=" << fixed(m.mean, 2) << " mb_per_s_stddev=" << fixed(m.stddev, 2) << "\n";
  return kExitOk;
}

int run_gen_tables(const std::string& out) {
  const TableSet tables = generate_default_tables();
  save_tables_file(tables, out);
  std::cout << "tables output=" << out << " bytes=" << serialize_tables(tables).size() << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Encoder, decoder and inspector for learned-image codestreams"};
  app.require_subcommand(1, 1);

  std::string in, out, yuv_desc, corpus;
  int runs = 5;
  PipelineFlags enc_flags, dec_flags, bench_flags, inspect_flags;

  CLI::App* enc = app.add_subcommand("encode", "encode a PPM/PGM/YUV picture");
  enc->add_option("input", in, "input picture")->required();
  enc->add_option("output", out, "output codestream")->required();
  enc->add_option("--yuv-desc", yuv_desc, "descriptor for .yuv input (default <input>.desc)");
  add_common(enc, enc_flags);
  add_encode_options(enc, enc_flags);

  CLI::App* dec = app.add_subcommand("decode", "decode a codestream to PPM/PGM/YUV");
  dec->add_option("input", in, "input codestream")->required();
  dec->add_option("output", out, "output picture")->required();
  add_common(dec, dec_flags);
  add_decode_options(dec, dec_flags);

  CLI::App* ins = app.add_subcommand("inspect", "print the segment tree and headers");
  ins->add_option("input", in, "codestream")->required();

  CLI::App* ben = app.add_subcommand("bench", "time encode/decode over a corpus directory");
  ben->add_option("corpus", corpus, "directory of .ppm/.pgm/.yuv pictures")->required();
  ben->add_option("--runs", runs, "timed runs per picture (at least 5)");
  add_common(ben, bench_flags);
  add_encode_options(ben, bench_flags);

  CLI::App* gen = app.add_subcommand("gen-tables", "write the default table file");
  gen->add_option("output", out, "table file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (enc->parsed()) return run_encode(in, out, yuv_desc, enc_flags);
    if (dec->parsed()) return run_decode(in, out, dec_flags);
    if (ins->parsed()) return run_inspect(in);
    if (ben->parsed()) return run_bench(corpus, runs, bench_flags);
    if (gen->parsed()) return run_gen_tables(out);
  } catch (const FormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    if (e.has_offset()) std::cerr << "error_offset=" << e.offset() << "\n";
    return kExitFormat;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
