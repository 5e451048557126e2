#include <algorithm>

#include "pcpkit/errors.hpp"
#include "pcpkit/hadamard.hpp"

namespace pcpkit {

namespace {

void check_table_bits(unsigned k) {
  if (k > kMaxTableBits) throw ResourceError("truth table over " + std::to_string(k) + " bits is too large");
}

}  // namespace

BoolFn::BoolFn(unsigned k) : k_(k) {
  check_table_bits(k);
  table_.assign(std::uint64_t{1} << k, 0);
}

BoolFn::BoolFn(unsigned k, std::vector<std::uint8_t> table) : k_(k), table_(std::move(table)) {
  check_table_bits(k);
  if (table_.size() != (std::uint64_t{1} << k)) throw ShapeError("truth table length must be 2^k");
  for (auto& t : table_)
    if (t > 1) throw ShapeError("truth table entries must be 0 or 1");
}

BoolFn wh_encode_index(std::uint64_t u, unsigned k) {
  BoolFn f(k);
  for (std::uint64_t x = 0; x < f.size(); ++x) f.set(x, parity(u & x) != 0);
  return f;
}

BoolFn wh_encode(const Bits& u) {
  check_table_bits(static_cast<unsigned>(u.size()));
  return wh_encode_index(bits_to_index(u), static_cast<unsigned>(u.size()));
}

Rat blr_pass_rate(const BoolFn& f) {
  if (f.k() > 14) throw ResourceError("pair enumeration limited to 14 input bits");
  std::uint64_t n = f.size(), pass = 0;
  for (std::uint64_t x = 0; x < n; ++x) {
    bool fx = f(x);
    for (std::uint64_t y = 0; y < n; ++y) pass += (f(x ^ y) == (fx != f(y))) ? 1 : 0;
  }
  return Rat(mpz_class(static_cast<unsigned long>(pass)), mpz_class(static_cast<unsigned long>(n)) * n);
}

std::vector<std::int64_t> walsh_spectrum(const BoolFn& f) {
  std::vector<std::int64_t> w(f.size());
  for (std::uint64_t x = 0; x < f.size(); ++x) w[x] = f(x) ? -1 : 1;
  for (std::uint64_t h = 1; h < w.size(); h <<= 1) {
    for (std::uint64_t i = 0; i < w.size(); i += h << 1) {
      for (std::uint64_t j = i; j < i + h; ++j) {
        std::int64_t a = w[j], b = w[j + h];
        w[j] = a + b;
        w[j + h] = a - b;
      }
    }
  }
  return w;
}

LinearFit nearest_linear(const BoolFn& f) {
  if (f.k() > 20) throw ResourceError("nearest codeword search limited to 20 input bits");
  auto w = walsh_spectrum(f);
  std::uint64_t best = 0;
  Bits best_bits = index_to_bits(0, f.k());
  for (std::uint64_t u = 1; u < w.size(); ++u) {
    if (w[u] < w[best]) continue;
    Bits cand = index_to_bits(u, f.k());
    if (w[u] > w[best] || cand < best_bits) {
      best = u;
      best_bits = std::move(cand);
    }
  }
  // agreement = (2^k + W(u)) / 2^(k+1)
  auto n = static_cast<long>(f.size());
  return {best_bits, Rat(n + w[best]) / Rat(2 * n)};
}

BoolFn majority_correction(const BoolFn& f) {
  if (f.k() > 14) throw ResourceError("majority correction limited to 14 input bits");
  BoolFn g(f.k());
  for (std::uint64_t x = 0; x < f.size(); ++x) {
    std::uint64_t ones = 0;
    for (std::uint64_t y = 0; y < f.size(); ++y) ones += (f(y) != f(x ^ y)) ? 1 : 0;
    g.set(x, 2 * ones >= f.size());
  }
  return g;
}

Rat distance(const BoolFn& f, const BoolFn& g) {
  if (f.k() != g.k()) throw ShapeError("distance between functions of different arity");
  std::uint64_t diff = 0;
  for (std::uint64_t x = 0; x < f.size(); ++x) diff += (f(x) != g(x)) ? 1 : 0;
  return Rat(mpz_class(static_cast<unsigned long>(diff)), mpz_class(static_cast<unsigned long>(f.size())));
}

}  // namespace pcpkit
