#pragma once

#include <cctype>
#include <cstdint>
#include <map>
#include <string>

#include "mlindex/bounds.hpp"

namespace mlindex {

// Ideal generated by homogeneous polynomials of one common degree.
struct HomIdeal {
  FieldPtr ctx;
  uint32_t num_vars = 0;
  uint32_t degree = 0;
  std::vector<SparsePoly> gens;
  std::vector<std::string> warnings;  // e.g. dropped zero generators
};

namespace detail {

struct IdealParser {
  const std::string& text;
  const FieldCtx& K;
  size_t pos = 0;
  int line = 1, col = 1;

  IdealParser(const std::string& t, const FieldCtx& k) : text(t), K(k) {}

  [[noreturn]] void error(const std::string& msg) {
    throw Error(Errc::ParseError, msg + " at line " + std::to_string(line) + ", col " +
                                      std::to_string(col));
  }

  void bump() {
    if (pos < text.size()) {
      if (text[pos] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
      ++pos;
    }
  }

  void skip_blanks() {
    while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t' || text[pos] == '\r')) bump();
  }

  bool done() {
    skip_blanks();
    return pos >= text.size();
  }

  char peek() {
    skip_blanks();
    return pos < text.size() ? text[pos] : '\0';
  }

  uint64_t parse_uint() {
    skip_blanks();
    if (pos >= text.size() || !std::isdigit(static_cast<unsigned char>(text[pos])))
      error("expected an integer");
    uint64_t v = 0;
    while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
      v = v * 10 + (text[pos] - '0');
      if (v > (1ULL << 62)) error("integer literal too large");
      bump();
    }
    return v;
  }

  // factor := x<i> ('^' e)?  -> appends i (0-based) e times
  void parse_factor(std::vector<uint32_t>& mono) {
    if (peek() != 'x') error("expected a variable x<i>");
    bump();
    uint64_t idx = parse_uint();
    if (idx < 1) error("variables are numbered from x1");
    uint64_t e = 1;
    if (peek() == '^') {
      bump();
      e = parse_uint();
    }
    if (e > 64) error("exponent too large");
    for (uint64_t k = 0; k < e; ++k) mono.push_back(static_cast<uint32_t>(idx - 1));
  }

  // term := INT ('*' factor)* | factor ('*' factor)*
  std::pair<Fq, std::vector<uint32_t>> parse_term() {
    Fq coeff = K.one();
    std::vector<uint32_t> mono;
    bool saw_any = false;
    if (std::isdigit(static_cast<unsigned char>(peek()))) {
      coeff = K.from_int(static_cast<int64_t>(parse_uint() % K.p()));
      saw_any = true;
      if (peek() == '*') bump();
      else if (peek() == 'x') {
        // tolerate the implicit product "3x1"
      } else
        return {coeff, mono};
    }
    while (peek() == 'x') {
      parse_factor(mono);
      saw_any = true;
      if (peek() == '*')
        bump();
      else
        break;
    }
    if (!saw_any) error("expected a term");
    std::sort(mono.begin(), mono.end());
    return {coeff, mono};
  }

  // gen := ['+'|'-'] term (('+'|'-') term)*
  SparsePoly parse_gen() {
    SparsePoly p;
    bool negate = false;
    if (peek() == '+' || peek() == '-') {
      negate = peek() == '-';
      bump();
    }
    while (true) {
      auto [c, mono] = parse_term();
      if (negate) c = K.neg(c);
      p.terms.push_back({c, std::move(mono)});
      char ch = peek();
      if (ch == '+' || ch == '-') {
        negate = ch == '-';
        bump();
        continue;
      }
      break;
    }
    return p;
  }
};

}  // namespace detail

// Parses the ideal text grammar: generators separated by commas or newlines,
// terms c*x<i>^e*..., coefficients reduced mod p. Duplicate monomials are
// merged; zero generators are dropped with a warning.
inline HomIdeal parse_ideal(const std::string& text, FieldPtr ctx, uint32_t num_vars = 0) {
  detail::IdealParser p(text, *ctx);
  std::vector<SparsePoly> raw;
  while (!p.done()) {
    while (p.peek() == ',' || p.peek() == '\n') p.bump();
    if (p.done()) break;
    raw.push_back(p.parse_gen());
    char ch = p.peek();
    if (ch != '\0' && ch != ',' && ch != '\n') p.error("expected ',' or end of line");
  }
  if (raw.empty()) fail(Errc::AllZero, "no generators");

  HomIdeal ideal;
  ideal.ctx = ctx;
  uint32_t max_var = 0;
  bool degree_set = false;
  for (size_t g = 0; g < raw.size(); ++g) {
    // merge duplicate monomials
    std::map<std::vector<uint32_t>, Fq> acc;
    for (auto& [c, mono] : raw[g].terms) {
      for (uint32_t v : mono) max_var = std::max(max_var, v + 1);
      if (degree_set) {
        if (mono.size() != ideal.degree)
          fail(Errc::MixedDegrees, "generator " + std::to_string(g + 1) + " has degree " +
                                       std::to_string(mono.size()) + ", expected " +
                                       std::to_string(ideal.degree));
      } else {
        ideal.degree = static_cast<uint32_t>(mono.size());
        degree_set = true;
      }
      auto [it, fresh] = acc.try_emplace(mono, 0);
      it->second = ctx->add(it->second, c);
    }
    SparsePoly merged;
    for (auto& [mono, c] : acc)
      if (c != 0) merged.terms.push_back({c, mono});
    if (merged.terms.empty()) {
      ideal.warnings.push_back("generator " + std::to_string(g + 1) + " is zero; dropped");
    } else {
      ideal.gens.push_back(std::move(merged));
    }
  }
  if (ideal.gens.empty()) fail(Errc::AllZero, "all generators are zero");
  if (num_vars) {
    if (num_vars < max_var) fail(Errc::BadInput, "num_vars smaller than used variables");
    ideal.num_vars = num_vars;
  } else {
    ideal.num_vars = max_var;
  }
  if (ideal.degree == 0) fail(Errc::BadInput, "constant generators are not homogeneous of positive degree");
  return ideal;
}

struct HeightBracket {
  BracketReport report;
  IndexReport beta_s;     // randomized beta_S over the lifted field
  uint64_t lifted_q = 0;
};

// Bracket the height of the ideal: polarize the generators to a symmetric
// map, compute h = beta_S by the randomized algorithm over a lifted field
// (height is invariant under extension), report h <= height <= C(h+d,d) - 1.
inline HeightBracket height_bracket(const HomIdeal& ideal, const RandConfig& cfg) {
  const uint32_t d = ideal.degree;
  const uint32_t m = ideal.num_vars;
  if (ideal.ctx->p() <= d) fail(Errc::SmallCharacteristic, "height bracketing needs char > degree");

  uint64_t N = static_cast<uint64_t>(d) * m + ideal.gens.size();
  uint64_t threshold = 2 * static_cast<uint64_t>(d) * N;

  HeightBracket out;
  FieldPtr work_ctx = ideal.ctx;
  if (ideal.ctx->q() <= threshold) {
    if (ideal.ctx->l() != 1) {
      out.report.guards.push_back("lift:unsupported_from_extension_field");
    } else {
      uint64_t l = 1;
      unsigned __int128 ql = ideal.ctx->p();
      while (ql <= threshold) {
        ql *= ideal.ctx->p();
        ++l;
      }
      work_ctx = field_make(ideal.ctx->p(), l);
      out.report.guards.push_back("lift:GF(" + std::to_string(ideal.ctx->p()) + "^" +
                                  std::to_string(l) + ")");
    }
  } else {
    out.report.guards.push_back("lift:not_needed");
  }
  out.lifted_q = work_ctx->q();

  MultiMap F = polarize(ideal.gens, m, work_ctx);
  out.beta_s = beta_randomized(F, cfg);
  uint64_t h = static_cast<uint64_t>(out.beta_s.value);

  out.report.quantity = "height";
  out.report.lower.known = true;
  out.report.lower.value = static_cast<double>(h);
  out.report.lower.exact_int = static_cast<long>(h);
  out.report.lower.is_exact_int = true;
  out.report.lower.provenance = "beta_S <= height, certified witness";
  mpz_class upper = binom_mpz(h + d, d) - 1;  // strict bound, heights are integers
  out.report.upper.known = true;
  out.report.upper.value = upper.get_d();
  out.report.upper.exact_int = upper;
  out.report.upper.is_exact_int = true;
  out.report.upper.provenance = "height < C(h+d,d)";
  out.report.guards.push_back(std::string("char>d:") +
                              (ideal.ctx->p() > d ? "ok" : "failed"));
  // |K| > height(a_F) is circular at runtime; over-approximate via the
  // largest conceivable height C(m+d-1,d) and flag it.
  mpz_class circ = binom_mpz(m + d - 1, d);
  out.report.guards.push_back(std::string("|K|>height_overapprox:") +
                              (mpz_class(static_cast<unsigned long>(work_ctx->q())) > circ
                                   ? "ok"
                                   : "failed"));
  return out;
}

}  // namespace mlindex
