/*
 * trivid - video pipeline co-design toolkit
 *
 * Copyright 2026 The trivid Authors
 * Licensed under the terms of the Apache 2.0 License.
 * See LICENSE file in the project root for terms.
 */

#include "trivid/pruning.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "trivid/error.hpp"

namespace trivid::pruning {

namespace {

constexpr double kFloorGuard = 1e-9;

size_t prune_target(size_t total, double ratio) {
  return static_cast<size_t>(
      std::floor(static_cast<double>(total) * ratio + kFloorGuard));
}

// Global flat addressing: tensors in archive order, row-major inside each.
struct FlatIndex {
  std::vector<size_t> offsets;  // one per tensor, plus total at the end

  explicit FlatIndex(const WeightArchive& archive) {
    offsets.reserve(archive.tensors.size() + 1);
    size_t acc = 0;
    for (const WeightTensor& t : archive.tensors) {
      offsets.push_back(acc);
      acc += t.size();
    }
    offsets.push_back(acc);
  }

  size_t total() const { return offsets.back(); }
};

void require_uniform_conv(const PruneMask& mask, int& k_out) {
  require(!mask.entries.empty(), "mask must not be empty");
  int k = 0;
  for (const MaskEntry& e : mask.entries) {
    require(e.shape.size() == 4 && e.shape[2] == e.shape[3],
            "operation requires 4-D square-kernel tensors");
    int ek = static_cast<int>(e.shape[2]);
    require(k == 0 || ek == k,
            "operation requires a uniform kernel size across tensors");
    k = ek;
  }
  k_out = k;
}

uint64_t choose_count(int n, int r, uint64_t cap) {
  if (r < 0 || r > n) return 0;
  unsigned __int128 c = 1;
  for (int i = 1; i <= r; ++i) {
    c = c * static_cast<unsigned>(n - r + i) / static_cast<unsigned>(i);
    if (c > cap) return cap + 1;
  }
  return static_cast<uint64_t>(c);
}

}  // namespace

int Pattern::nnz() const {
  int n = 0;
  for (uint8_t b : bits) n += b ? 1 : 0;
  return n;
}

std::string Pattern::bit_string() const {
  std::string s(bits.size(), '0');
  for (size_t i = 0; i < bits.size(); ++i) {
    if (bits[i]) s[i] = '1';
  }
  return s;
}

void PatternLibrary::validate() const {
  require(k >= 1, "kernel size must be >= 1");
  require(target_nnz >= 1 && target_nnz <= k * k,
          "target nnz must lie in [1, k*k]");
  require(!patterns.empty(), "pattern library must not be empty");
  std::vector<std::string> seen;
  for (const Pattern& p : patterns) {
    require(p.k == k, "pattern kernel size must match the library");
    require(static_cast<int>(p.bits.size()) == k * k,
            "pattern bit count must be k*k");
    require(p.nnz() == target_nnz, "pattern nnz must equal target nnz");
    seen.push_back(p.bit_string());
  }
  std::sort(seen.begin(), seen.end());
  require(std::adjacent_find(seen.begin(), seen.end()) == seen.end(),
          "library patterns must be distinct");
}

PruneMask global_magnitude_mask(const WeightArchive& archive, double ratio) {
  archive.validate();
  require(ratio >= 0.0 && ratio < 1.0, "prune ratio must lie in [0,1)");
  PruneMask mask = full_mask(archive);
  FlatIndex flat(archive);
  size_t m = prune_target(flat.total(), ratio);
  if (m == 0) return mask;

  std::vector<size_t> order(flat.total());
  std::iota(order.begin(), order.end(), size_t{0});
  std::vector<float> mag(flat.total());
  for (size_t ti = 0; ti < archive.tensors.size(); ++ti) {
    const WeightTensor& t = archive.tensors[ti];
    for (size_t i = 0; i < t.values.size(); ++i) {
      mag[flat.offsets[ti] + i] = std::fabs(t.values[i]);
    }
  }
  // Ascending (magnitude, global index): the global index already encodes
  // (tensor index, flat index) order.
  std::stable_sort(order.begin(), order.end(), [&mag](size_t a, size_t b) {
    return mag[a] < mag[b];
  });
  for (size_t i = 0; i < m; ++i) {
    size_t g = order[i];
    size_t ti =
        static_cast<size_t>(std::upper_bound(flat.offsets.begin(),
                                             flat.offsets.end(), g) -
                            flat.offsets.begin()) -
        1;
    mask.entries[ti].bits[g - flat.offsets[ti]] = 0;
  }
  return mask;
}

WeightArchive identity_retrain(const WeightArchive& archive) {
  return archive;
}

IterativeResult iterative_magnitude_prune_with_weights(
    const WeightArchive& archive, double ratio, int rounds,
    const RetrainCallback& retrain) {
  archive.validate();
  require(ratio >= 0.0 && ratio < 1.0, "prune ratio must lie in [0,1)");
  require(rounds >= 1, "round count must be >= 1");

  FlatIndex flat(archive);
  IterativeResult out;
  out.mask = full_mask(archive);
  out.weights = archive;
  size_t pruned = 0;

  for (int t = 1; t <= rounds; ++t) {
    double cumulative =
        1.0 - std::pow(1.0 - ratio, static_cast<double>(t) / rounds);
    size_t target = prune_target(flat.total(), cumulative);
    if (target > pruned) {
      std::vector<size_t> kept_order;
      kept_order.reserve(flat.total() - pruned);
      std::vector<float> mag(flat.total());
      for (size_t ti = 0; ti < out.weights.tensors.size(); ++ti) {
        const WeightTensor& w = out.weights.tensors[ti];
        for (size_t i = 0; i < w.values.size(); ++i) {
          if (!out.mask.entries[ti].bits[i]) continue;
          size_t g = flat.offsets[ti] + i;
          mag[g] = std::fabs(w.values[i]);
          kept_order.push_back(g);
        }
      }
      std::stable_sort(kept_order.begin(), kept_order.end(),
                       [&mag](size_t a, size_t b) { return mag[a] < mag[b]; });
      size_t need = target - pruned;
      for (size_t i = 0; i < need; ++i) {
        size_t g = kept_order[i];
        size_t ti =
            static_cast<size_t>(std::upper_bound(flat.offsets.begin(),
                                                 flat.offsets.end(), g) -
                                flat.offsets.begin()) -
            1;
        out.mask.entries[ti].bits[g - flat.offsets[ti]] = 0;
      }
      pruned = target;
    }
    out.weights = apply_mask(out.weights, out.mask);
    if (t < rounds) {
      WeightArchive updated = retrain(out.weights);
      check_congruent(updated, out.mask);
      out.weights = apply_mask(updated, out.mask);
    }
  }
  return out;
}

PruneMask iterative_magnitude_prune(const WeightArchive& archive, double ratio,
                                    int rounds,
                                    const RetrainCallback& retrain) {
  return iterative_magnitude_prune_with_weights(archive, ratio, rounds,
                                                retrain)
      .mask;
}

PruneMask extract_kernel_mask(const PruneMask& m_imp) {
  m_imp.validate();
  PruneMask out;
  out.entries.reserve(m_imp.entries.size());
  for (const MaskEntry& e : m_imp.entries) {
    require(e.shape.size() == 4 && e.shape[2] == e.shape[3],
            "kernel extraction requires 4-D square-kernel tensors");
    size_t kk = static_cast<size_t>(e.shape[2]) * e.shape[3];
    MaskEntry r;
    r.name = e.name;
    r.shape = e.shape;
    r.bits.assign(e.bits.size(), 1);
    for (size_t base = 0; base < e.bits.size(); base += kk) {
      bool any = false;
      for (size_t i = 0; i < kk; ++i) {
        if (e.bits[base + i]) {
          any = true;
          break;
        }
      }
      if (!any) std::fill_n(r.bits.begin() + base, kk, uint8_t{0});
    }
    out.entries.push_back(std::move(r));
  }
  return out;
}

double sparse_kernel_ratio(const PruneMask& m_imp) {
  m_imp.validate();
  size_t pruned = 0;
  size_t in_sparse_kernels = 0;
  for (const MaskEntry& e : m_imp.entries) {
    for (uint8_t b : e.bits) pruned += b ? 0 : 1;
    if (e.shape.size() != 4 || e.shape[2] != e.shape[3]) continue;
    size_t kk = static_cast<size_t>(e.shape[2]) * e.shape[3];
    for (size_t base = 0; base < e.bits.size(); base += kk) {
      bool any = false;
      for (size_t i = 0; i < kk; ++i) {
        if (e.bits[base + i]) {
          any = true;
          break;
        }
      }
      if (!any) in_sparse_kernels += kk;
    }
  }
  if (pruned == 0) {
    throw UndefinedMetricError(
        "sparse kernel ratio is undefined without pruned weights");
  }
  return static_cast<double>(in_sparse_kernels) / static_cast<double>(pruned);
}

PatternLibrary build_pattern_library(const WeightArchive& archive,
                                     const PruneMask& m_imp,
                                     const PruneMask& kernel_mask, int L,
                                     int target_nnz) {
  check_congruent(archive, m_imp);
  check_congruent(archive, kernel_mask);
  require(L >= 1, "library size must be >= 1");
  int k = 0;
  require_uniform_conv(kernel_mask, k);
  int kk = k * k;
  require(target_nnz >= 1 && target_nnz <= kk,
          "target nnz must lie in [1, k*k]");

  // Frequency and magnitude coverage of each observed top-nnz shape, plus
  // per-position magnitude totals for padding candidates.
  std::map<std::string, std::pair<int64_t, double>> shapes;
  std::vector<double> position_total(static_cast<size_t>(kk), 0.0);
  int64_t eligible = 0;

  for (size_t ti = 0; ti < archive.tensors.size(); ++ti) {
    const WeightTensor& t = archive.tensors[ti];
    const MaskEntry& imp = m_imp.entries[ti];
    const MaskEntry& kmask = kernel_mask.entries[ti];
    for (size_t base = 0; base < t.values.size();
         base += static_cast<size_t>(kk)) {
      if (!kmask.bits[base]) continue;  // kernel-pruned, uniform inside
      ++eligible;
      std::vector<double> mag(static_cast<size_t>(kk));
      for (int i = 0; i < kk; ++i) {
        size_t gi = base + static_cast<size_t>(i);
        mag[static_cast<size_t>(i)] =
            imp.bits[gi] ? std::fabs(t.values[gi]) : 0.0;
        position_total[static_cast<size_t>(i)] += mag[static_cast<size_t>(i)];
      }
      std::vector<int> order(static_cast<size_t>(kk));
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(), [&mag](int a, int b) {
        return mag[static_cast<size_t>(a)] > mag[static_cast<size_t>(b)];
      });
      std::string bits(static_cast<size_t>(kk), '0');
      double coverage = 0.0;
      for (int i = 0; i < target_nnz; ++i) {
        bits[static_cast<size_t>(order[static_cast<size_t>(i)])] = '1';
        coverage += mag[static_cast<size_t>(order[static_cast<size_t>(i)])];
      }
      auto& slot = shapes[bits];
      slot.first += 1;
      slot.second += coverage;
    }
  }
  if (eligible == 0) {
    throw EmptyLibraryError("no kernels survive the kernel mask");
  }

  // Most frequent first; frequency ties resolve on the bit string.
  std::vector<std::pair<std::string, int64_t>> ranked;
  ranked.reserve(shapes.size());
  for (const auto& [bits, stat] : shapes) ranked.emplace_back(bits, stat.first);
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });

  PatternLibrary lib;
  lib.k = k;
  lib.target_nnz = target_nnz;
  for (const auto& [bits, count] : ranked) {
    if (static_cast<int>(lib.patterns.size()) == L) break;
    Pattern p;
    p.k = k;
    p.bits.assign(bits.begin(), bits.end());
    for (uint8_t& b : p.bits) b = b == '1' ? 1 : 0;
    lib.patterns.push_back(std::move(p));
  }

  if (static_cast<int>(lib.patterns.size()) < L) {
    constexpr uint64_t kMaxEnumeration = 2000000;
    uint64_t space = choose_count(kk, target_nnz, kMaxEnumeration);
    require(space >= static_cast<uint64_t>(L),
            "library size exceeds the number of distinct patterns");
    require(space <= kMaxEnumeration,
            "pattern space too large to pad the library");
    // Rank unused shapes by total magnitude coverage; coverage is additive
    // over positions, so per-position totals suffice.
    std::vector<std::pair<double, std::string>> unused;
    std::vector<int> comb(static_cast<size_t>(target_nnz));
    std::iota(comb.begin(), comb.end(), 0);
    while (true) {
      std::string bits(static_cast<size_t>(kk), '0');
      double coverage = 0.0;
      for (int pos : comb) {
        bits[static_cast<size_t>(pos)] = '1';
        coverage += position_total[static_cast<size_t>(pos)];
      }
      if (shapes.find(bits) == shapes.end()) {
        unused.emplace_back(coverage, bits);
      }
      int i = target_nnz - 1;
      while (i >= 0 && comb[static_cast<size_t>(i)] == kk - target_nnz + i) {
        --i;
      }
      if (i < 0) break;
      ++comb[static_cast<size_t>(i)];
      for (int j = i + 1; j < target_nnz; ++j) {
        comb[static_cast<size_t>(j)] = comb[static_cast<size_t>(j - 1)] + 1;
      }
    }
    std::sort(unused.begin(), unused.end(), [](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first > b.first;
      return a.second < b.second;
    });
    for (const auto& [coverage, bits] : unused) {
      if (static_cast<int>(lib.patterns.size()) == L) break;
      Pattern p;
      p.k = k;
      p.bits.assign(bits.begin(), bits.end());
      for (uint8_t& b : p.bits) b = b == '1' ? 1 : 0;
      lib.patterns.push_back(std::move(p));
    }
  }
  lib.validate();
  return lib;
}

AssignResult assign_patterns_detailed(const WeightArchive& archive,
                                      const PruneMask& kernel_mask,
                                      const PatternLibrary& library) {
  check_congruent(archive, kernel_mask);
  library.validate();
  int k = 0;
  require_uniform_conv(kernel_mask, k);
  require(k == library.k, "library kernel size must match the tensors");
  int kk = k * k;

  AssignResult out;
  out.histogram.assign(library.patterns.size(), 0);
  out.mask.entries.reserve(kernel_mask.entries.size());
  for (size_t ti = 0; ti < archive.tensors.size(); ++ti) {
    const WeightTensor& t = archive.tensors[ti];
    const MaskEntry& kmask = kernel_mask.entries[ti];
    MaskEntry r;
    r.name = kmask.name;
    r.shape = kmask.shape;
    r.bits.assign(kmask.bits.size(), 0);
    for (size_t base = 0; base < t.values.size();
         base += static_cast<size_t>(kk)) {
      if (!kmask.bits[base]) continue;
      size_t best = 0;
      double best_sum = -1.0;
      for (size_t pi = 0; pi < library.patterns.size(); ++pi) {
        const Pattern& p = library.patterns[pi];
        double s = 0.0;
        for (int i = 0; i < kk; ++i) {
          if (p.bits[static_cast<size_t>(i)]) {
            s += std::fabs(t.values[base + static_cast<size_t>(i)]);
          }
        }
        if (s > best_sum) {
          best_sum = s;
          best = pi;
        }
      }
      const Pattern& chosen = library.patterns[best];
      for (int i = 0; i < kk; ++i) {
        r.bits[base + static_cast<size_t>(i)] =
            chosen.bits[static_cast<size_t>(i)];
      }
      ++out.histogram[best];
    }
    out.mask.entries.push_back(std::move(r));
  }
  return out;
}

PruneMask assign_patterns(const WeightArchive& archive,
                          const PruneMask& kernel_mask,
                          const PatternLibrary& library) {
  return assign_patterns_detailed(archive, kernel_mask, library).mask;
}

WeightArchive apply_mask(const WeightArchive& archive, const PruneMask& mask) {
  check_congruent(archive, mask);
  WeightArchive out = archive;
  for (size_t ti = 0; ti < out.tensors.size(); ++ti) {
    const MaskEntry& e = mask.entries[ti];
    for (size_t i = 0; i < e.bits.size(); ++i) {
      if (!e.bits[i]) out.tensors[ti].values[i] = 0.0f;
    }
  }
  return out;
}

HardwareAwareResult hardware_aware_prune(const WeightArchive& archive,
                                         double ratio, int rounds, int L,
                                         int target_nnz,
                                         const RetrainCallback& retrain) {
  IterativeResult imp =
      iterative_magnitude_prune_with_weights(archive, ratio, rounds, retrain);
  PruneMask kernel_mask = extract_kernel_mask(imp.mask);
  PatternLibrary library =
      build_pattern_library(archive, imp.mask, kernel_mask, L, target_nnz);
  AssignResult assigned =
      assign_patterns_detailed(archive, kernel_mask, library);

  HardwareAwareResult out;
  out.mask = std::move(assigned.mask);
  out.library = std::move(library);
  WeightArchive retrained = retrain(apply_mask(archive, out.mask));
  check_congruent(retrained, out.mask);
  out.weights = apply_mask(retrained, out.mask);

  size_t total = archive.total_size();
  out.stats.pruning_ratio =
      1.0 - static_cast<double>(out.mask.total_kept()) /
                static_cast<double>(total);
  // An all-kept magnitude mask has no pruned weights to classify.
  out.stats.sparse_kernel_ratio = imp.mask.total_kept() == total
                                      ? 0.0
                                      : sparse_kernel_ratio(imp.mask);
  for (const MaskEntry& e : out.mask.entries) {
    out.stats.kept_per_tensor.emplace_back(e.name, e.kept_count());
  }
  out.stats.pattern_histogram = std::move(assigned.histogram);
  return out;
}

Json pattern_library_to_json(const PatternLibrary& library) {
  library.validate();
  Json j;
  j["k"] = library.k;
  j["target_nnz"] = library.target_nnz;
  j["patterns"] = Json::array();
  for (const Pattern& p : library.patterns) {
    j["patterns"].push_back(p.bit_string());
  }
  return j;
}

PatternLibrary pattern_library_from_json(const Json& j) {
  try {
    PatternLibrary lib;
    lib.k = j.at("k").get<int>();
    lib.target_nnz = j.at("target_nnz").get<int>();
    for (const auto& item : j.at("patterns")) {
      std::string bits = item.get<std::string>();
      if (static_cast<int>(bits.size()) != lib.k * lib.k) {
        throw FormatError("pattern bit string length must be k*k");
      }
      Pattern p;
      p.k = lib.k;
      p.bits.resize(bits.size());
      for (size_t i = 0; i < bits.size(); ++i) {
        if (bits[i] != '0' && bits[i] != '1') {
          throw FormatError("pattern bit strings must contain only 0/1");
        }
        p.bits[i] = bits[i] == '1' ? 1 : 0;
      }
      lib.patterns.push_back(std::move(p));
    }
    lib.validate();
    return lib;
  } catch (const Json::exception& e) {
    throw FormatError(std::string("malformed pattern library JSON: ") +
                      e.what());
  }
}

}  // namespace trivid::pruning
