// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The lidarsynth Authors
//
// End-to-end acceptance gate: prints one PASS/FAIL line per criterion and
// exits nonzero if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <map>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "gradcheck.hpp"
#include "lidarsynth/config.hpp"
#include "lidarsynth/geometry.hpp"
#include "lidarsynth/model.hpp"
#include "lidarsynth/radar_dsp.hpp"
#include "lidarsynth/synthgen.hpp"
#include "lidarsynth/training.hpp"

using namespace lidarsynth;

namespace {

using Clock = std::chrono::steady_clock;

int failures = 0;

void report(int id, bool pass, const std::string& detail, Clock::time_point start) {
  const double secs = std::chrono::duration<double>(Clock::now() - start).count();
  std::printf("criterion %d %s: %s (%.1f s)\n", id, pass ? "PASS" : "FAIL", detail.c_str(), secs);
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), f, args...);
  return buf;
}

using cdouble = std::complex<double>;

void fft_oracle() {
  const auto start = Clock::now();
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  double worst = 0.0, worst_parseval = 0.0;
  for (std::size_t n = 1; n <= 64; ++n) {
    for (int trial = 0; trial < 4; ++trial) {
      std::vector<cdouble> x(n);
      for (auto& v : x) v = {g(rng), g(rng)};
      const auto fast = fft_1d(std::span<const cdouble>(x));
      double err = 0.0, ref_norm = 0.0, time_energy = 0.0, freq_energy = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        std::complex<long double> acc = 0;
        for (std::size_t t = 0; t < n; ++t) {
          const long double a = -2.0L * std::numbers::pi_v<long double> * static_cast<long double>(k * t % n) /
                                static_cast<long double>(n);
          acc += std::complex<long double>(x[t]) * std::complex<long double>(std::cos(a), std::sin(a));
        }
        const cdouble naive(static_cast<double>(acc.real()), static_cast<double>(acc.imag()));
        err += std::norm(fast[k] - naive);
        ref_norm += std::norm(naive);
        time_energy += std::norm(x[k]);
        freq_energy += std::norm(fast[k]);
      }
      worst = std::max(worst, std::sqrt(err / ref_norm));
      worst_parseval = std::max(worst_parseval, std::abs(freq_energy / static_cast<double>(n) - time_energy) / time_energy);
    }
  }
  report(1, worst < 1e-6 && worst_parseval < 1e-5,
         fmt("fft vs naive DFT, lengths 1-64: max rel err %.2e; Parseval max rel err %.2e", worst, worst_parseval),
         start);
}

void geometry_oracle() {
  const auto start = Clock::now();
  const auto grid = GridSpec::full_scale();
  std::vector<std::size_t> region_rows;
  for (const auto& r : grid.phi_regions()) region_rows.push_back(r.bins());
  const bool dims_ok = grid.n_rows() == 1088 && grid.n_cols() == 1440 &&
                       region_rows == std::vector<std::size_t>{220, 640, 228};

  std::mt19937_64 rng(2);
  std::uniform_int_distribution<std::size_t> cell(0, grid.n_rows() * grid.n_cols() - 1);
  std::uniform_real_distribution<float> range(0.0f, static_cast<float>(grid.max_range()));
  std::size_t mismatched = 0, points = 0;
  std::vector<float> data(grid.n_rows() * grid.n_cols());
  for (int trial = 0; trial < 1000; ++trial) {
    std::fill(data.begin(), data.end(), 0.0f);
    const std::size_t count = 1 + trial % 3000;  // up to ~0.2% occupancy
    for (std::size_t i = 0; i < count; ++i) {
      float r = range(rng);
      if (r == 0.0f) r = static_cast<float>(grid.max_range());  // zero means "no return"
      if (trial % 10 == 0 && i < 8) r = i % 2 ? static_cast<float>(grid.max_range()) : 1e-3f;  // range extremes
      data[cell(rng)] = r;
    }
    const PolarRaster raster(grid, data);
    const auto cloud = derasterize(raster);
    points += cloud.size();
    const auto back = rasterize(cloud, grid);
    if (back.dropped != 0 || !(back.raster == raster)) ++mismatched;
  }
  report(2, dims_ok && mismatched == 0,
         fmt("default grid %zux%zu, region rows %zu/%zu/%zu; %zu of 1000 rasters (%zu points) failed the round trip",
             grid.n_rows(), grid.n_cols(), region_rows[0], region_rows[1], region_rows[2], mismatched, points),
         start);
}

void gradient_suite() {
  const auto start = Clock::now();
  std::map<std::string, std::pair<int, int>> per_op;  // shapes checked, shapes passed
  double worst = 0.0;
  for (const auto& c : gradcheck::all_cases()) {
    const auto r = gradcheck::run(c);
    auto& [n, ok] = per_op[c.op];
    ++n;
    bool pass = r.forward_error < 1e-5;
    for (double e : r.gradient_errors) pass = pass && e < 1e-4;
    ok += pass;
    worst = std::max(worst, r.worst());
  }
  bool pass = true;
  std::string detail;
  for (const auto& [op, counts] : per_op) {
    const int need = op == "shape_ops" ? 1 : 3;
    pass = pass && counts.first >= need && counts.second == counts.first;
    detail += fmt("%s %d/%d, ", op.c_str(), counts.second, counts.first);
  }
  report(3, pass, detail + fmt("worst rel err %.2e", worst), start);
}

std::pair<std::size_t, std::size_t> decoder_extent(const DecoderConfig& d) {
  std::size_t h = d.seed_phi, w = d.seed_theta;
  for (std::size_t l = 0; l <= d.filters.size(); ++l) {
    h = conv_transpose_extent(h, d.kernel, d.stride, d.padding);
    w = conv_transpose_extent(w, d.kernel, d.stride, d.padding);
  }
  return {w, h};
}

void architecture_shapes() {
  const auto start = Clock::now();
  const auto def = Config::full_scale();
  def.validate();
  const auto [w, h] = decoder_extent(def.model.decoder);
  std::vector<std::size_t> chain{1};
  chain.insert(chain.end(), def.model.decoder.filters.begin(), def.model.decoder.filters.end());
  chain.push_back(1);
  std::string chain_text;
  for (auto c : chain) chain_text += (chain_text.empty() ? "" : "->") + std::to_string(c);

  const auto legacy = parse_config("grid.phi_regions = -60:-5:0.25, -5:5:0.015625, 5:30:0.25\ndecoder.seed = 45,30\n");
  const auto [lw, lh] = decoder_extent(legacy.model.decoder);
  const bool pass = w == 1440 && h == 1088 && def.model.decoder.seed_theta == 45 && def.model.decoder.seed_phi == 34 &&
                    chain == std::vector<std::size_t>{1, 256, 128, 64, 64, 1} && lw == 1440 && lh == 960 &&
                    legacy.model.grid.n_rows() == 960;
  report(4, pass,
         fmt("default seed 45x34 -> %zux%zu via %s; legacy seed 45x30 -> %zux%zu", w, h, chain_text.c_str(), lw, lh),
         start);
}

void loss_band() {
  const auto start = Clock::now();
  const auto cfg = Config::full_scale();
  const auto w = weight_mask(cfg.model.grid, cfg.train);
  std::size_t weighted = 0, first = w.size(), last = 0, other = 0;
  for (std::size_t r = 0; r < w.size(); ++r) {
    if (w[r] == 10.0f) {
      ++weighted;
      first = std::min(first, r);
      last = std::max(last, r);
    } else if (w[r] != 1.0f) {
      ++other;
    }
  }
  const std::vector<float> target{1, 2, 3, 4}, zeros(4, 0.0f), rows{10, 1};
  const double hand = raster_mmse(zeros, target, rows, 2);
  report(5, first == 430 && last == 679 && weighted == 250 && other == 0 && hand == 18.75,
         fmt("rows %zu-%zu weighted (%zu rows) at 10, others 1; 2x2 example = %g", first, last, weighted, hand), start);
}

struct ToyRun {
  Dataset data;
  Split split;
  TrainResult result;
  EvalReport report;
};

ToyRun toy_run(const Config& cfg) {
  ToyRun run;
  const auto names = mixed_profile_names();
  for (std::size_t i = 0; i < 200; ++i) {
    const auto& prof = scene_profile(names[i % names.size()]);
    run.data.samples.push_back(make_sample(generate_sample(cfg, prof, sample_seed(42, i)), cfg));
  }
  run.split = split_dataset(run.data, cfg.split);
  run.result = train(run.data, run.split, cfg);
  LidarModel model(cfg.model, run.result.best.clone());
  run.report = evaluate(model, cfg, run.data, run.split.test);
  return run;
}

bool sequential_split(const Dataset& data, const Split& split) {
  std::map<std::string, std::vector<std::size_t>> by_scenario;
  for (std::size_t i = 0; i < data.size(); ++i) by_scenario[data.samples[i].scenario].push_back(i);
  Split expected;
  for (const auto& [name, idx] : by_scenario) {
    const std::size_t n = idx.size(), tr = n * 6 / 10, va = n * 2 / 10;
    expected.train.insert(expected.train.end(), idx.begin(), idx.begin() + static_cast<long>(tr));
    expected.val.insert(expected.val.end(), idx.begin() + static_cast<long>(tr), idx.begin() + static_cast<long>(tr + va));
    expected.test.insert(expected.test.end(), idx.begin() + static_cast<long>(tr + va), idx.end());
  }
  for (auto* v : {&expected.train, &expected.val, &expected.test}) std::sort(v->begin(), v->end());
  return expected.train == split.train && expected.val == split.val && expected.test == split.test;
}

}  // namespace

int main() {
  fft_oracle();
  geometry_oracle();
  gradient_suite();
  architecture_shapes();
  loss_band();

  const Config cfg = Config::toy();
  auto start = Clock::now();
  const ToyRun run = toy_run(cfg);
  const double run_secs = std::chrono::duration<double>(Clock::now() - start).count();

  // 6: recipe, checked on the recorded toy-run history and the default config
  {
    const auto t6 = Clock::now();
    bool lr_ok = run.result.history.size() == 20;
    for (const auto& h : run.result.history) lr_ok = lr_ok && h.lr == (h.epoch <= 10 ? 1e-3 : 1e-4);
    const auto def = Config::full_scale().train;
    for (std::size_t e = 1; e <= 20; ++e) lr_ok = lr_ok && def.lr_at(e) == (e <= 10 ? 1e-3 : 1e-4);
    const bool split_ok = sequential_split(run.data, run.split) && run.split.train.size() == 120 &&
                          run.split.val.size() == 40 && run.split.test.size() == 40;
    const bool batch_ok = def.batch_size == 32 && cfg.train.batch_size == 32 &&
                          run.result.batch_sizes == std::vector<std::size_t>{32, 32, 32, 24};
    report(6, lr_ok && split_ok && batch_ok,
           fmt("lr 1e-3 for epochs 1-10 and 1e-4 for 11-20 %s; split %zu/%zu/%zu sequential per scenario %s; "
               "batches 32,32,32,24 %s",
               lr_ok ? "ok" : "WRONG", run.split.train.size(), run.split.val.size(), run.split.test.size(),
               split_ok ? "ok" : "WRONG", batch_ok ? "ok" : "WRONG"),
           t6);
  }

  // 7: toy run
  {
    const auto t7 = Clock::now();
    const auto& hist = run.result.history;
    const double first = hist.front().train_mmse, last = hist.back().train_mmse;
    const bool a = last <= 0.5 * first;
    const bool b = run.report.overall <= 0.7 * run.report.baseline_zeros;
    const EvalReport ablation = ablation_no_fusion(run.data, run.split, cfg);
    bool c = std::isfinite(ablation.overall) && ablation.scenarios.size() == run.report.scenarios.size() &&
             ablation.baseline_zeros == run.report.baseline_zeros;
    for (std::size_t i = 0; c && i < ablation.scenarios.size(); ++i) {
      c = ablation.scenarios[i].scenario == run.report.scenarios[i].scenario &&
          ablation.scenarios[i].count == run.report.scenarios[i].count && std::isfinite(ablation.scenarios[i].mmse);
    }
    const double secs = run_secs + std::chrono::duration<double>(Clock::now() - t7).count();
    report(7, a && b && c,
           fmt("(a) train MMSE %.1f -> %.1f (%.1f%% of epoch 1) %s; (b) test %.1f vs all-zeros %.1f (%.1f%%) %s; "
               "(c) no-fusion test %.1f, report fields match %s; run %.0f s",
               first, last, 100.0 * last / first, a ? "ok" : "FAIL", run.report.overall, run.report.baseline_zeros,
               100.0 * run.report.overall / run.report.baseline_zeros, b ? "ok" : "FAIL", ablation.overall,
               c ? "ok" : "FAIL", secs),
           t7);
  }

  // 8: determinism
  {
    const auto t8 = Clock::now();
    const ToyRun again = toy_run(cfg);
    double worst = again.result.history.size() == run.result.history.size() ? 0.0 : INFINITY;
    for (std::size_t e = 0; e < std::min(again.result.history.size(), run.result.history.size()); ++e) {
      const auto& x = run.result.history[e];
      const auto& y = again.result.history[e];
      worst = std::max(worst, std::abs(x.train_mmse - y.train_mmse) / std::abs(x.train_mmse));
      worst = std::max(worst, std::abs(x.val_mmse - y.val_mmse) / std::abs(x.val_mmse));
    }
    report(8, worst <= 1e-5, fmt("repeated toy run, max rel history difference %.2e", worst), t8);
  }

  std::printf("%s: %d criteria failed\n", failures ? "FAIL" : "PASS", failures);
  return failures == 0 ? 0 : 1;
}
