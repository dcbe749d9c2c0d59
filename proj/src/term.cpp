// term.cpp - linear terms and atoms

#include <algorithm>
#include <numeric>
#include <sstream>

#include "diverge/solver.hpp"

namespace diverge {

namespace {

std::int64_t add_checked(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_add_overflow(a, b, &r)) throw ArithmeticOverflow();
  return r;
}

std::int64_t mul_checked(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_mul_overflow(a, b, &r)) throw ArithmeticOverflow();
  return r;
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

}  // namespace

std::string default_name(SymValue v) { return "v" + std::to_string(v.id); }

Term Term::constant(std::int64_t c) {
  Term t;
  t.constant_ = c;
  return t;
}

Term Term::var(SymValue v, std::int64_t coeff) {
  Term t;
  if (coeff != 0) t.coeffs_.push_back({v, coeff});
  return t;
}

std::optional<SymValue> Term::as_var() const {
  if (constant_ == 0 && coeffs_.size() == 1 && coeffs_[0].second == 1) return coeffs_[0].first;
  return std::nullopt;
}

std::int64_t Term::coeff_of(SymValue v) const {
  auto it = std::lower_bound(coeffs_.begin(), coeffs_.end(), v,
                             [](const auto& p, SymValue x) { return p.first < x; });
  return it != coeffs_.end() && it->first == v ? it->second : 0;
}

std::vector<SymValue> Term::vars() const {
  std::vector<SymValue> out;
  out.reserve(coeffs_.size());
  for (const auto& [v, c] : coeffs_) out.push_back(v);
  return out;
}

void Term::normalize() {
  std::sort(coeffs_.begin(), coeffs_.end());
  std::vector<std::pair<SymValue, std::int64_t>> merged;
  for (const auto& [v, c] : coeffs_) {
    if (!merged.empty() && merged.back().first == v)
      merged.back().second = add_checked(merged.back().second, c);
    else
      merged.push_back({v, c});
  }
  merged.erase(std::remove_if(merged.begin(), merged.end(),
                              [](const auto& p) { return p.second == 0; }),
               merged.end());
  coeffs_ = std::move(merged);
}

Term Term::operator+(const Term& o) const {
  Term r;
  r.constant_ = add_checked(constant_, o.constant_);
  // Both inputs are sorted; merge.
  size_t i = 0, j = 0;
  while (i < coeffs_.size() || j < o.coeffs_.size()) {
    if (j == o.coeffs_.size() || (i < coeffs_.size() && coeffs_[i].first < o.coeffs_[j].first)) {
      r.coeffs_.push_back(coeffs_[i++]);
    } else if (i == coeffs_.size() || o.coeffs_[j].first < coeffs_[i].first) {
      r.coeffs_.push_back(o.coeffs_[j++]);
    } else {
      std::int64_t c = add_checked(coeffs_[i].second, o.coeffs_[j].second);
      if (c != 0) r.coeffs_.push_back({coeffs_[i].first, c});
      ++i;
      ++j;
    }
  }
  return r;
}

Term Term::operator-(const Term& o) const { return *this + o.scaled(-1); }

Term Term::scaled(std::int64_t k) const {
  if (k == 0) return Term();
  Term r;
  r.constant_ = mul_checked(constant_, k);
  r.coeffs_.reserve(coeffs_.size());
  for (const auto& [v, c] : coeffs_) r.coeffs_.push_back({v, mul_checked(c, k)});
  return r;
}

Term Term::plus_constant(std::int64_t c) const {
  Term r = *this;
  r.constant_ = add_checked(constant_, c);
  return r;
}

Term Term::substitute(SymValue v, const Term& replacement) const {
  std::int64_t c = coeff_of(v);
  if (c == 0) return *this;
  Term without = *this - Term::var(v, c);
  return without + replacement.scaled(c);
}

Term Term::rename(const std::function<SymValue(SymValue)>& f) const {
  Term r;
  r.constant_ = constant_;
  for (const auto& [v, c] : coeffs_) r.coeffs_.push_back({f(v), c});
  r.normalize();
  return r;
}

std::string Term::to_string(const Namer& namer) const {
  std::ostringstream os;
  bool first = true;
  for (const auto& [v, c] : coeffs_) {
    if (first) {
      if (c == -1) os << '-';
      else if (c != 1) os << c << '*';
    } else {
      os << (c < 0 ? " - " : " + ");
      std::int64_t m = c < 0 ? -c : c;
      if (m != 1) os << m << '*';
    }
    os << namer(v);
    first = false;
  }
  if (first) {
    os << constant_;
  } else if (constant_ != 0) {
    os << (constant_ < 0 ? " - " : " + ") << (constant_ < 0 ? -constant_ : constant_);
  }
  return os.str();
}

std::optional<bool> Atom::constant_truth() const {
  if (!term.is_constant()) return std::nullopt;
  std::int64_t c = term.constant_part();
  switch (rel) {
    case Rel::Eq: return c == 0;
    case Rel::Ne: return c != 0;
    case Rel::Le: return c <= 0;
  }
  return std::nullopt;
}

Atom Atom::negated_le() const { return Atom{Rel::Le, (-term).plus_constant(1)}; }

std::string Atom::to_string(const Namer& namer) const {
  // Print as `linear REL constant`.
  Term lin = term.plus_constant(-term.constant_part());
  std::int64_t rhs = -term.constant_part();
  const char* op = rel == Rel::Eq ? " = " : rel == Rel::Ne ? " != " : " <= ";
  if (lin.is_constant()) return term.to_string(namer) + op + "0";
  return lin.to_string(namer) + op + std::to_string(rhs);
}

Atom make_atom(const Term& lhs, CmpOp op, const Term& rhs) {
  Term d = lhs - rhs;
  switch (op) {
    case CmpOp::Eq: return {Rel::Eq, d};
    case CmpOp::Ne: return {Rel::Ne, d};
    case CmpOp::Le: return {Rel::Le, d};
    case CmpOp::Lt: return {Rel::Le, d.plus_constant(1)};
    case CmpOp::Ge: return {Rel::Le, -d};
    case CmpOp::Gt: return {Rel::Le, (-d).plus_constant(1)};
  }
  return {Rel::Eq, d};
}

std::optional<Atom> normalize_atom(const Atom& a) {
  const auto& cs = a.term.coeffs();
  if (cs.empty()) return a;
  std::int64_t g = 0;
  for (const auto& [v, c] : cs) g = std::gcd(g, c < 0 ? -c : c);
  std::int64_t c0 = a.term.constant_part();
  Atom out = a;
  switch (a.rel) {
    case Rel::Le: {
      // g*t' + c0 <= 0  <=>  t' <= floor(-c0 / g)
      std::int64_t bound = floor_div(-c0, g);
      Term scaled;
      for (const auto& [v, c] : cs) scaled = scaled + Term::var(v, c / g);
      out.term = scaled.plus_constant(-bound);
      return out;
    }
    case Rel::Eq:
    case Rel::Ne: {
      if (c0 % g != 0) {
        if (a.rel == Rel::Eq) return std::nullopt;
        return Atom{Rel::Ne, Term::constant(1)};  // trivially true
      }
      std::int64_t sign = cs.front().second < 0 ? -1 : 1;
      Term scaled;
      for (const auto& [v, c] : cs) scaled = scaled + Term::var(v, sign * c / g);
      out.term = scaled.plus_constant(sign * c0 / g);
      return out;
    }
  }
  return out;
}

std::vector<Atom> negate(const Atom& a) {
  switch (a.rel) {
    case Rel::Eq:
      return {Atom{Rel::Le, a.term.plus_constant(1)}, Atom{Rel::Le, (-a.term).plus_constant(1)}};
    case Rel::Ne: return {Atom{Rel::Eq, a.term}};
    case Rel::Le: return {a.negated_le()};
  }
  return {};
}

std::vector<TerminationCondition> record_termination_condition(
    std::vector<TerminationCondition> tcs, const Atom& guard, int head, SourceLoc loc,
    bool polarity) {
  tcs.push_back({guard, head, loc, polarity});
  return tcs;
}

}  // namespace diverge
