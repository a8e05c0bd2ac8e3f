#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <tuple>
#include <utility>
#include <vector>

#include "nfr/dispersion.hpp"
#include "nfr/grid.hpp"

namespace nfr {

struct PairEntry {
  std::int32_t key;
  std::uint16_t i1, i2;
};

// Half-open run [begin, end) inside a sorted pair list.
struct IndexRange {
  std::size_t begin = 0, end = 0;
  std::size_t size() const { return end > begin ? end - begin : 0; }
};

// For every output node k, the admissible pairs (i1, i2) (third index on the
// grid) sorted by modulation.  Any window |offset + sigma * mu| <= tau is then a
// contiguous run, so restricted sums only touch the pairs they keep.
class ModulationIndex {
 public:
  ModulationIndex(Equation eq, const FrequencyGrid& g)
      : lat_(eq, g), grid_(g), lists_(g.n()), buckets_(g.n()), built_(g.n(), 0) {
    if (lat_.max_key() > std::numeric_limits<std::int32_t>::max())
      throw Error(ErrorKind::ResourceLimit, "grid too large for the modulation index");
  }

  static std::shared_ptr<const ModulationIndex> shared(Equation eq, const FrequencyGrid& g) {
    static std::mutex mu;
    static std::map<std::tuple<int, double, std::size_t>, std::shared_ptr<const ModulationIndex>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto key = std::make_tuple(static_cast<int>(eq), g.xi_max(), g.n());
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    auto p = std::make_shared<const ModulationIndex>(eq, g);
    cache.emplace(key, p);
    return p;
  }

  const LatticeModulation& lattice() const { return lat_; }
  const FrequencyGrid& grid() const { return grid_; }
  Equation equation() const { return lat_.eq; }
  double unit() const { return lat_.unit; }
  double mu(const PairEntry& e) const { return lat_.unit * static_cast<double>(e.key); }
  long third(long k, const PairEntry& e) const { return lat_.third(k, e.i1, e.i2); }

  const std::vector<PairEntry>& pairs(std::size_t k) const {
    if (!built_[k]) build(k);
    return lists_[k];
  }

  // Run of pairs with |offset + sigma * mu| <= tau (sigma = +1 or -1).
  IndexRange inside(std::size_t k, double offset, int sigma, double tau) const {
    IndexRange r;
    if (sigma > 0) {
      r.begin = pp(k, (-tau - offset) / unit(), [&](const PairEntry& e) { return offset + mu(e) < -tau; });
      r.end = pp(k, (tau - offset) / unit(), [&](const PairEntry& e) { return offset + mu(e) <= tau; });
    } else {
      r.begin = pp(k, (offset - tau) / unit(), [&](const PairEntry& e) { return offset - mu(e) > tau; });
      r.end = pp(k, (offset + tau) / unit(), [&](const PairEntry& e) { return offset - mu(e) >= -tau; });
    }
    if (r.end < r.begin) r.end = r.begin;
    return r;
  }

  // First position whose key is >= K.
  std::size_t first_at_least(std::size_t k, long K) const {
    const auto& v = pairs(k);
    const auto& b = buckets_[k];
    if (v.empty() || K <= v.front().key) return 0;
    if (K > v.back().key) return v.size();
    long off = K - v.front().key;
    std::size_t i = static_cast<std::size_t>(off / b.width);
    auto lo = v.begin() + static_cast<long>(b.start[i]), hi = v.begin() + static_cast<long>(b.start[i + 1]);
    return static_cast<std::size_t>(
        std::lower_bound(lo, hi, K, [](const PairEntry& e, long key) { return e.key < key; }) - v.begin());
  }

 private:
  struct Buckets {
    long width = 1;
    std::vector<std::uint32_t> start;  // start[i]: first position with key >= front + i * width
  };

  // Partition point of a predicate that flips near key x; the bucket table
  // brackets it and the exact predicate decides inside the bracket.
  template <class P>
  std::size_t pp(std::size_t k, double x, P&& pred) const {
    const auto& v = pairs(k);
    if (v.empty()) return 0;
    const double lo_key = static_cast<double>(v.front().key) - 2, hi_key = static_cast<double>(v.back().key) + 2;
    double c = std::isnan(x) ? lo_key : std::clamp(x, lo_key, hi_key);
    long K = static_cast<long>(std::floor(c));
    auto a = v.begin() + static_cast<long>(first_at_least(k, K - 1));
    auto b = v.begin() + static_cast<long>(first_at_least(k, K + 2));
    return static_cast<std::size_t>(std::partition_point(a, b, pred) - v.begin());
  }

  void build(std::size_t k) const {
    long n = static_cast<long>(grid_.n());
    auto& out = lists_[k];
    out.clear();
    long kk = static_cast<long>(k);
    for (long i1 = 0; i1 < n; ++i1)
      for (long i2 = 0; i2 < n; ++i2) {
        long i3 = lat_.third(kk, i1, i2);
        if (i3 < 0 || i3 >= n) continue;
        out.push_back(PairEntry{static_cast<std::int32_t>(lat_.key(kk, i1, i2, i3)), static_cast<std::uint16_t>(i1),
                                static_cast<std::uint16_t>(i2)});
      }
    std::stable_sort(out.begin(), out.end(), [](const PairEntry& a, const PairEntry& b) { return a.key < b.key; });
    auto& bk = buckets_[k];
    bk.start.clear();
    if (!out.empty()) {
      long span = static_cast<long>(out.back().key) - out.front().key + 1;
      long want = std::max<long>(1, static_cast<long>(out.size()) / 4);
      bk.width = std::max<long>(1, span / want);
      long nb = span / bk.width + 1;
      bk.start.resize(static_cast<std::size_t>(nb) + 1);
      std::size_t p = 0;
      for (long i = 0; i <= nb; ++i) {
        long K = out.front().key + i * bk.width;
        while (p < out.size() && out[p].key < K) ++p;
        bk.start[static_cast<std::size_t>(i)] = static_cast<std::uint32_t>(p);
      }
    }
    built_[k] = 1;
  }

  LatticeModulation lat_;
  FrequencyGrid grid_;
  mutable std::vector<std::vector<PairEntry>> lists_;
  mutable std::vector<Buckets> buckets_;
  mutable std::vector<char> built_;
};

}  // namespace nfr
