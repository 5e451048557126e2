#include "pcpkit/cnf.hpp"

#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "pcpkit/errors.hpp"

namespace pcpkit {

namespace {

bool literal_true(int lit, const Bits& x) {
  bool v = x[static_cast<std::size_t>(std::abs(lit) - 1)] != 0;
  return lit > 0 ? v : !v;
}

}  // namespace

void Cnf::validate() const {
  for (const auto& c : clauses)
    for (int lit : c)
      if (lit == 0 || static_cast<std::uint32_t>(std::abs(lit)) > num_vars)
        throw IndexError("literal " + std::to_string(lit) + " outside the variable range");
}

bool Cnf::satisfies(const Bits& x) const { return satisfied_count(x) == clauses.size(); }

std::size_t Cnf::satisfied_count(const Bits& x) const {
  if (x.size() != num_vars) throw ShapeError("assignment length differs from the variable count");
  std::size_t s = 0;
  for (const auto& c : clauses) {
    for (int lit : c) {
      if (literal_true(lit, x)) {
        ++s;
        break;
      }
    }
  }
  return s;
}

std::size_t Cnf::max_width() const {
  std::size_t w = 0;
  for (const auto& c : clauses) w = std::max(w, c.size());
  return w;
}

std::optional<Bits> solve_brute_force(const Cnf& cnf, unsigned max_vars) {
  cnf.validate();
  if (cnf.num_vars > max_vars) throw ResourceError("too many variables for exhaustive search");
  for (std::uint64_t code = 0; code < (std::uint64_t{1} << cnf.num_vars); ++code) {
    Bits x = index_to_bits(code, cnf.num_vars);
    if (cnf.satisfies(x)) return x;
  }
  return std::nullopt;
}

Cnf read_dimacs(std::istream& is) {
  Cnf cnf;
  std::string line;
  bool header = false;
  std::size_t declared = 0;
  std::vector<int> current;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == 'c' || line[0] == '%') continue;
    std::istringstream ls(line);
    if (line[0] == 'p') {
      std::string p, fmt;
      long nv = -1, nc = -1;
      ls >> p >> fmt >> nv >> nc;
      if (fmt != "cnf" || nv < 0 || nc < 0) throw ParseError("bad DIMACS header: " + line);
      cnf.num_vars = static_cast<std::uint32_t>(nv);
      declared = static_cast<std::size_t>(nc);
      header = true;
      continue;
    }
    if (!header) throw ParseError("clause before the DIMACS header");
    std::string tok;
    while (ls >> tok) {
      char* end = nullptr;
      long lit = std::strtol(tok.c_str(), &end, 10);
      if (*end != '\0') throw ParseError("bad literal: " + tok);
      if (lit == 0) {
        cnf.clauses.push_back(std::move(current));
        current.clear();
      } else {
        current.push_back(static_cast<int>(lit));
      }
    }
  }
  if (!header) throw ParseError("missing DIMACS header");
  if (!current.empty()) cnf.clauses.push_back(std::move(current));
  if (cnf.clauses.size() != declared) throw ParseError("clause count differs from the header");
  try {
    cnf.validate();
  } catch (const IndexError& e) {
    throw ParseError(e.what());
  }
  return cnf;
}

void write_dimacs(std::ostream& os, const Cnf& cnf) {
  os << "p cnf " << cnf.num_vars << ' ' << cnf.clauses.size() << '\n';
  for (const auto& c : cnf.clauses) {
    for (int lit : c) os << lit << ' ';
    os << "0\n";
  }
}

}  // namespace pcpkit
