// Copyright 2026 The fpdel Authors
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

#include "fpdel/blind_ops.hpp"

#include <string>

namespace fpdel::blind {

ClearLut ClearLut::FromFunction(unsigned input_bits, unsigned output_bits,
                                const std::function<std::uint64_t(std::uint64_t)>& f) {
  ClearLut lut;
  lut.input_bits = input_bits;
  lut.output_bits = output_bits;
  const std::uint64_t out_mask =
      output_bits >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << output_bits) - 1;
  lut.rows.resize(std::size_t{1} << input_bits);
  for (std::uint64_t p = 0; p < lut.rows.size(); ++p) lut.rows[p] = f(p) & out_mask;
  lut.validate();
  return lut;
}

ClearLut ClearLut::AlternatingParity(unsigned input_bits) {
  return FromFunction(input_bits, 1, [](std::uint64_t p) { return p & 1U; });
}

ClearLut ClearLut::Identity(unsigned bits) {
  return FromFunction(bits, bits, [](std::uint64_t p) { return p; });
}

std::uint64_t ClearLut::lookup(std::uint64_t pattern) const {
  if (pattern >= rows.size()) {
    throw Error(ErrorCode::kOutOfRange, "pattern outside the table");
  }
  return rows[pattern];
}

void ClearLut::validate() const {
  if (input_bits == 0 || input_bits > 16) {
    throw Error(ErrorCode::kInvalidArgument, "LUT input width must be 1..16");
  }
  if (output_bits == 0 || output_bits > 64) {
    throw Error(ErrorCode::kInvalidArgument, "LUT output width must be 1..64");
  }
  if (rows.size() != (std::size_t{1} << input_bits)) {
    throw Error(ErrorCode::kInvalidArgument,
                "LUT must have exactly 2^n rows, got " + std::to_string(rows.size()));
  }
}

Ciphertext blind_or(const Evaluator& ev, const Ciphertext& x, const Ciphertext& y) {
  return ev.sub(ev.add(x, y), ev.mul(x, y));
}

Ciphertext blind_not(const Evaluator& ev, const Ciphertext& x, const Ciphertext& one) {
  return ev.sub(one, x);
}

Ciphertext blind_if(const Evaluator& ev, const Ciphertext& bit, const Ciphertext& f,
                    const Ciphertext& g, const Ciphertext& one) {
  return ev.add(ev.mul(bit, f), ev.mul(blind_not(ev, bit, one), g));
}

Ciphertext extract_one(const Evaluator& ev, std::span<const Ciphertext> bits) {
  if (bits.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "extract_one needs at least one bit");
  }
  Ciphertext acc = bits.front();
  for (std::size_t i = 1; i < bits.size(); ++i) acc = blind_or(ev, acc, bits[i]);
  return acc;
}

Ciphertext extract_zero(const Evaluator& ev, const Ciphertext& any) {
  return ev.sub(any, any);
}

Ciphertext blind_xnor(const Evaluator& ev, const Ciphertext& x, const Ciphertext& y,
                      const Ciphertext& one) {
  // 1 - x - y + 2xy
  const Ciphertext two_xy = ev.mul_const(ev.mul(x, y), 2);
  return ev.add(ev.sub(ev.sub(one, x), y), two_xy);
}

Ciphertext blind_equal(const Evaluator& ev, std::span<const Ciphertext> a,
                       std::span<const Ciphertext> b, const Ciphertext& one) {
  if (a.size() != b.size() || a.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "blind_equal needs equal, non-empty widths");
  }
  Ciphertext acc;
  for (std::size_t i = a.size(); i-- > 0;) {
    Ciphertext term = blind_xnor(ev, a[i], b[i], one);
    acc = acc.valid() ? ev.mul(acc, term) : term;
  }
  return acc;
}

namespace {

struct LutWalk {
  const Evaluator& ev;
  const ClearLut& lut;
  std::span<const Ciphertext> bits;
  std::vector<Ciphertext> negated;
  std::vector<Ciphertext> outputs;

  bool any_output(std::uint64_t lo, std::uint64_t hi) const {
    for (std::uint64_t p = lo; p < hi; ++p) {
      if (lut.rows[p] != 0) return true;
    }
    return false;
  }

  // `level` bits remain below `prefix`; `acc` is the product so far.
  void visit(unsigned level, std::uint64_t prefix, const Ciphertext& acc) {
    if (level == 0) {
      const std::uint64_t out = lut.rows[prefix];
      for (unsigned j = 0; j < lut.output_bits; ++j) {
        if ((out >> j) & 1U) outputs[j] = ev.add(outputs[j], acc);
      }
      return;
    }
    const unsigned bit = level - 1;
    for (std::uint64_t v : {0U, 1U}) {
      const std::uint64_t next = (prefix << 1) | v;
      if (!any_output(next << bit, (next + 1) << bit)) continue;
      const Ciphertext& factor = v ? bits[bit] : negated[bit];
      visit(bit, next, acc.valid() ? ev.mul(acc, factor) : factor);
    }
  }
};

}  // namespace

std::vector<Ciphertext> blind_lut_eval(const Evaluator& ev,
                                       std::span<const Ciphertext> input_bits,
                                       const ClearLut& lut) {
  lut.validate();
  if (input_bits.size() != lut.input_bits) {
    throw Error(ErrorCode::kInvalidArgument, "input width differs from the LUT width");
  }
  const Ciphertext one = extract_one(ev, input_bits);
  LutWalk walk{ev, lut, input_bits, {}, {}};
  walk.negated.reserve(input_bits.size());
  for (const Ciphertext& b : input_bits) walk.negated.push_back(blind_not(ev, b, one));
  walk.outputs.assign(lut.output_bits, extract_zero(ev, input_bits.front()));
  walk.visit(lut.input_bits, 0, Ciphertext{});
  return std::move(walk.outputs);
}

}  // namespace fpdel::blind
