/*
 * Copyright 2026 The pimolap Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "pimolap/microcode.hpp"

#include <algorithm>
#include <map>
#include <string>

#include "pimolap/errors.hpp"

namespace pimolap::microcode {

using fabric::LogicOp;
using Kind = Predicate::Kind;

std::uint64_t CycleTable::in_list(std::uint32_t w, std::size_t m) const {
  return m * eq(w) + (m - 1) * ops.or_;
}

std::uint64_t CycleTable::combine(LogicOp op, std::size_t m) const {
  return m == 0 ? 0 : (m - 1) * ops.cycles(op);
}

std::uint64_t FilterProgram::cycles() const {
  std::uint64_t c = 0;
  for (const auto& s : steps) {
    if (const auto* st = std::get_if<PartitionStage>(&s)) c += st->seq.cycles;
  }
  return c;
}

std::size_t FilterProgram::transfers() const {
  return static_cast<std::size_t>(std::count_if(steps.begin(), steps.end(), [](const FilterStep& s) {
    return std::holds_alternative<BitTransfer>(s);
  }));
}

std::size_t FilterProgram::op_count() const {
  std::size_t n = 0;
  for (const auto& s : steps) {
    if (const auto* st = std::get_if<PartitionStage>(&s)) n += st->seq.ops.size();
  }
  return n;
}

namespace {

class Compiler {
 public:
  Compiler(const Placement& pl, const CycleTable& table) : pl_(pl), t_(table) {
    for (const auto& w : pl.work) free_.emplace_back(w.temps.rbegin(), w.temps.rend());
  }

  FilterProgram run(const Predicate& pred, std::uint32_t part, std::uint32_t out) {
    emit(pred, part, out);
    return std::move(prog_);
  }

 private:
  std::uint32_t acquire(std::uint32_t p) {
    if (free_[p].empty()) {
      throw CapacityError("predicate needs more scratch columns than partition " + std::to_string(p) + " has");
    }
    auto c = free_[p].back();
    free_[p].pop_back();
    return c;
  }

  void release(std::uint32_t p, std::uint32_t c) { free_[p].push_back(c); }

  device::LogicSequence& stage(std::uint32_t p) {
    if (prog_.steps.empty() || !std::holds_alternative<PartitionStage>(prog_.steps.back()) ||
        std::get<PartitionStage>(prog_.steps.back()).partition != p) {
      prog_.steps.emplace_back(PartitionStage{p, {}});
    }
    return std::get<PartitionStage>(prog_.steps.back()).seq;
  }

  void op(std::uint32_t p, LogicOp o, std::vector<std::uint32_t> in, std::uint32_t out) {
    stage(p).ops.push_back({o, std::move(in), out});
    actual_ += t_.ops.cycles(o);
  }

  void charge(std::uint32_t p, std::uint64_t cycles) { stage(p).cycles += cycles; }

  std::set<std::uint32_t> parts(const Predicate& n) const {
    std::set<std::uint32_t> out;
    if (n.kind == Kind::kCompare) {
      out.insert(pl_.attrs[n.attr_index].partition);
      if (n.attr_vs_attr()) out.insert(pl_.attrs[n.rhs_index].partition);
    }
    for (const auto& c : n.children) {
      auto s = parts(c);
      out.insert(s.begin(), s.end());
    }
    return out;
  }

  static bool local_to(const std::set<std::uint32_t>& s, std::uint32_t p) {
    return s.empty() || (s.size() == 1 && *s.begin() == p);
  }

  // Evaluates `n` in partition q and leaves the bit in p's transfer column.
  std::uint32_t bring(const Predicate& n, std::uint32_t q, std::uint32_t p) {
    const auto tmp = acquire(q);
    emit(n, q, tmp);
    const auto dst = pl_.work[p].transfer;
    prog_.steps.emplace_back(BitTransfer{q, tmp, p, dst});
    release(q, tmp);
    return dst;
  }

  void emit(const Predicate& n, std::uint32_t p, std::uint32_t out) {
    if (!n.bound) throw InvalidArgumentError("predicate must be bound before compilation");
    const auto ps = parts(n);
    if (ps.size() == 1 && *ps.begin() != p) {
      const auto col = bring(n, *ps.begin(), p);
      op(p, LogicOp::kOr, {col}, out);
      charge(p, t_.ops.or_);
      return;
    }
    switch (n.kind) {
      case Kind::kTrue:
        op(p, LogicOp::kOr, {pl_.work[p].valid}, out);
        charge(p, t_.ops.or_);
        return;
      case Kind::kFalse:
        op(p, LogicOp::kAndNot, {pl_.work[p].valid, pl_.work[p].valid}, out);
        charge(p, t_.ops.and_not);
        return;
      case Kind::kNot: {
        const auto t = acquire(p);
        emit(n.children.front(), p, t);
        op(p, LogicOp::kNot, {t}, out);
        charge(p, t_.ops.not_);
        release(p, t);
        return;
      }
      case Kind::kAnd:
      case Kind::kOr:
        emit_combination(n, p, out);
        return;
      case Kind::kCompare:
        emit_leaf(n, p, out);
        return;
    }
  }

  void emit_combination(const Predicate& n, std::uint32_t p, std::uint32_t out) {
    const LogicOp combine = n.kind == Kind::kAnd ? LogicOp::kAnd : LogicOp::kOr;
    // Children living wholly in one foreign partition are combined there and
    // moved once.
    std::vector<Predicate> items;
    std::map<std::uint32_t, std::vector<Predicate>> foreign;
    for (const auto& c : n.children) {
      const auto s = parts(c);
      if (s.size() == 1 && *s.begin() != p) {
        foreign[*s.begin()].push_back(c);
      } else {
        items.push_back(c);
      }
    }
    for (auto& [q, group] : foreign) {
      if (group.size() == 1) {
        items.push_back(std::move(group.front()));
        continue;
      }
      Predicate g = n.kind == Kind::kAnd ? Predicate::all_of(std::move(group)) : Predicate::any_of(std::move(group));
      g.bound = true;
      items.push_back(std::move(g));
    }

    emit(items.front(), p, out);
    for (std::size_t i = 1; i < items.size(); ++i) {
      const auto s = parts(items[i]);
      if (s.size() == 1 && *s.begin() != p) {
        const auto col = bring(items[i], *s.begin(), p);
        op(p, combine, {out, col}, out);
      } else {
        const auto t = acquire(p);
        emit(items[i], p, t);
        op(p, combine, {out, t}, out);
        release(p, t);
      }
      charge(p, t_.ops.cycles(combine));
    }
  }

  struct Field {
    std::uint32_t start;
    std::uint32_t width;
    std::uint32_t bit(std::uint32_t i) const { return start + i; }
  };

  Field field(std::size_t attr) const {
    const auto& ap = pl_.attrs[attr];
    return {ap.cols.start, ap.cols.width};
  }

  void emit_eq(const Field& a, std::uint64_t c, std::uint32_t p, std::uint32_t out) {
    std::vector<std::uint32_t> zeros;
    std::vector<std::uint32_t> ones;
    for (std::uint32_t i = 0; i < a.width; ++i) ((c >> i) & 1 ? ones : zeros).push_back(a.bit(i));
    std::size_t next = 0;
    if (!zeros.empty()) {
      op(p, LogicOp::kNor, zeros, out);
    } else {
      op(p, LogicOp::kOr, {ones[0]}, out);
      next = 1;
    }
    for (; next < ones.size(); ++next) op(p, LogicOp::kAnd, {out, ones[next]}, out);
  }

  // a < c (strict) or a <= c, resolved from the least significant bit up.
  void emit_lt(const Field& a, std::uint64_t c, bool strict, std::uint32_t p, std::uint32_t out) {
    const bool c0 = c & 1;
    if (c0 && !strict) {
      op(p, LogicOp::kNor, {a.bit(0)}, out);
      op(p, LogicOp::kOr, {out, a.bit(0)}, out);
    } else if (!c0 && strict) {
      op(p, LogicOp::kAndNot, {a.bit(0), a.bit(0)}, out);
    } else {
      op(p, LogicOp::kNot, {a.bit(0)}, out);
    }
    if (a.width == 1) return;
    const auto t = acquire(p);
    for (std::uint32_t i = 1; i < a.width; ++i) {
      if ((c >> i) & 1) {
        op(p, LogicOp::kNot, {a.bit(i)}, t);
        op(p, LogicOp::kOr, {out, t}, out);
      } else {
        op(p, LogicOp::kAndNot, {out, a.bit(i)}, out);
      }
    }
    release(p, t);
  }

  void emit_negated(std::uint32_t p, std::uint32_t out, auto&& body) {
    const auto t = acquire(p);
    body(t);
    op(p, LogicOp::kNot, {t}, out);
    release(p, t);
  }

  void emit_leaf(const Predicate& n, std::uint32_t p, std::uint32_t out) {
    if (n.attr_vs_attr()) {
      emit_attr_compare(n, p, out);
      return;
    }
    const auto a = field(n.attr_index);
    const auto w = a.width;
    const auto c = n.codes;
    switch (n.op) {
      case CmpOp::kEq:
        emit_eq(a, c[0], p, out);
        charge(p, t_.eq(w));
        return;
      case CmpOp::kNe:
        emit_negated(p, out, [&](std::uint32_t t) { emit_eq(a, c[0], p, t); });
        charge(p, t_.ne(w));
        return;
      case CmpOp::kLt:
      case CmpOp::kLe:
        emit_lt(a, c[0], n.op == CmpOp::kLt, p, out);
        charge(p, t_.cmp(w));
        return;
      case CmpOp::kGt:
      case CmpOp::kGe:
        emit_negated(p, out, [&](std::uint32_t t) { emit_lt(a, c[0], n.op == CmpOp::kGe, p, t); });
        charge(p, t_.cmp(w));
        return;
      case CmpOp::kBetween: {
        const auto lo = acquire(p);
        emit_negated(p, lo, [&](std::uint32_t t) { emit_lt(a, c[0], true, p, t); });
        emit_lt(a, c[1], false, p, out);
        op(p, LogicOp::kAnd, {out, lo}, out);
        release(p, lo);
        charge(p, t_.between(w));
        return;
      }
      case CmpOp::kIn: {
        emit_eq(a, c[0], p, out);
        for (std::size_t i = 1; i < c.size(); ++i) {
          const auto t = acquire(p);
          emit_eq(a, c[i], p, t);
          op(p, LogicOp::kOr, {out, t}, out);
          release(p, t);
        }
        charge(p, t_.in_list(w, c.size()));
        return;
      }
    }
  }

  // Attribute against attribute; the narrower side is padded with a zero
  // column. Charged by the operations actually emitted.
  void emit_attr_compare(const Predicate& n, std::uint32_t p, std::uint32_t out) {
    if (pl_.attrs[n.attr_index].partition != p || pl_.attrs[n.rhs_index].partition != p) {
      throw InvalidArgumentError("attribute comparison " + n.attribute + " vs " + n.rhs_attribute +
                                 " requires both attributes in one partition");
    }
    const auto before = actual_;
    const auto a = field(n.attr_index);
    const auto b = field(n.rhs_index);
    const std::uint32_t w = std::max(a.width, b.width);
    const auto zero = acquire(p);
    op(p, LogicOp::kAndNot, {pl_.work[p].valid, pl_.work[p].valid}, zero);
    auto bit = [&](const Field& f, std::uint32_t i) { return i < f.width ? f.bit(i) : zero; };

    auto eq_into = [&](std::uint32_t dst, bool negate) {
      const auto diff = acquire(p);
      const auto t = acquire(p);
      op(p, LogicOp::kXor, {bit(a, 0), bit(b, 0)}, diff);
      for (std::uint32_t i = 1; i < w; ++i) {
        op(p, LogicOp::kXor, {bit(a, i), bit(b, i)}, t);
        op(p, LogicOp::kOr, {diff, t}, diff);
      }
      op(p, negate ? LogicOp::kNot : LogicOp::kOr, {diff}, dst);
      release(p, t);
      release(p, diff);
    };
    // x < y
    auto lt_into = [&](const Field& x, const Field& y, std::uint32_t dst) {
      const auto t = acquire(p);
      op(p, LogicOp::kAndNot, {bit(y, 0), bit(x, 0)}, dst);
      for (std::uint32_t i = 1; i < w; ++i) {
        op(p, LogicOp::kXor, {bit(x, i), bit(y, i)}, t);
        op(p, LogicOp::kAndNot, {dst, t}, dst);
        op(p, LogicOp::kAndNot, {bit(y, i), bit(x, i)}, t);
        op(p, LogicOp::kOr, {dst, t}, dst);
      }
      release(p, t);
    };

    switch (n.op) {
      case CmpOp::kEq: eq_into(out, true); break;
      case CmpOp::kNe: eq_into(out, false); break;
      case CmpOp::kLt: lt_into(a, b, out); break;
      case CmpOp::kGt: lt_into(b, a, out); break;
      case CmpOp::kLe: emit_negated(p, out, [&](std::uint32_t t) { lt_into(b, a, t); }); break;
      case CmpOp::kGe: emit_negated(p, out, [&](std::uint32_t t) { lt_into(a, b, t); }); break;
      default: throw InvalidArgumentError("unsupported attribute comparison");
    }
    release(p, zero);
    charge(p, actual_ - before);
  }

  const Placement& pl_;
  const CycleTable& t_;
  FilterProgram prog_;
  std::vector<std::vector<std::uint32_t>> free_;
  std::uint64_t actual_ = 0;
};

}  // namespace

FilterProgram compile_filter(const Predicate& pred, const Placement& placement, std::uint32_t result_partition,
                             std::uint32_t result_col, const CycleTable& table) {
  if (result_partition >= placement.partitions()) throw OutOfRangeError("no such partition");
  if (result_col >= placement.cols) throw OutOfRangeError("result column out of range");
  Compiler c(placement, table);
  auto prog = c.run(pred, result_partition, result_col);
  prog.result_partition = result_partition;
  prog.result_col = result_col;
  return prog;
}

device::LogicSequence compile_mux(const MuxSpec& spec, const fabric::LogicCosts& costs) {
  const auto w = spec.value_cols.width;
  if (w == 0 || w > 64) throw InvalidArgumentError("MUX value width must be in [1, 64]");
  if (w < 64 && (spec.immediate >> w) != 0) {
    throw InvalidArgumentError("MUX immediate " + std::to_string(spec.immediate) + " wider than " +
                               std::to_string(w) + " bits");
  }
  const fabric::ColumnRange s{spec.select_col, 1};
  const fabric::ColumnRange ns{spec.scratch_col, 1};
  if (spec.select_col == spec.scratch_col || spec.value_cols.overlaps(s) || spec.value_cols.overlaps(ns)) {
    throw InvalidArgumentError("MUX select, scratch and value columns must be distinct");
  }
  device::LogicSequence seq;
  seq.emit(costs, LogicOp::kNot, {spec.select_col}, spec.scratch_col);
  for (std::uint32_t i = 0; i < w; ++i) {
    const auto v = spec.value_cols.start + i;
    if ((spec.immediate >> i) & 1) {
      seq.emit(costs, LogicOp::kOr, {v, spec.select_col}, v);
    } else {
      seq.emit(costs, LogicOp::kAnd, {v, spec.scratch_col}, v);
    }
  }
  return seq;
}

}  // namespace pimolap::microcode
