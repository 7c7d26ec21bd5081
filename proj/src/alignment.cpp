#include "seacim/alignment.hpp"

#include <bit>
#include <stdexcept>
#include <string>

namespace seacim {

namespace {

std::uint32_t low_mask(int bits) { return bits >= 32 ? ~0u : (1u << bits) - 1u; }

// Right shift with a count of the 1-bits that fall off.
Alignment truncate(std::uint32_t sig, int shift) {
  if (shift >= kSignificandBits) return {0, std::popcount(sig), kSignificandBits};
  return {sig >> shift, std::popcount(sig & low_mask(shift)), kSignificandBits};
}

}  // namespace

Significand raw_significand(Fp16 v) {
  if (!v.is_finite()) throw std::invalid_argument("raw_significand: non-finite value " + to_hex(v));
  const auto f = static_cast<std::uint32_t>(v.fraction());
  return {v.exponent() == 0 ? f : 1024u + f, v.sign()};
}

Significand field_significand(Fp16 v) {
  auto s = raw_significand(v);
  if (v.exponent() == 0) s.magnitude <<= 1;
  return s;
}

Alignment align(std::uint32_t sig, int shift, InputWidth kind, int m_d) {
  if (sig >= (1u << kSignificandBits)) throw std::invalid_argument("align: significand wider than 11 bits");
  if (shift < 0) throw std::invalid_argument("align: negative shift");
  if (kind == InputWidth::Fwi) return truncate(sig, shift);

  if (m_d < 0 || m_d > 31) throw std::invalid_argument("align: m_d " + std::to_string(m_d) + " outside [0,31]");
  Alignment out;
  out.width = kSignificandBits + m_d;
  if (shift <= m_d) {
    out.significand = static_cast<std::uint64_t>(sig) << (m_d - shift);
    return out;
  }
  const auto residual = truncate(sig, shift - m_d);
  out.significand = residual.significand;
  out.dropped_bits = residual.dropped_bits;
  return out;
}

}  // namespace seacim
