#include <array>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "pcpkit/errors.hpp"
#include "pcpkit/hadamard.hpp"

namespace pcpkit {

namespace {

constexpr std::array<char, 4> kProofMagic{'W', 'H', 'P', 'F'};

Bits parse_bit_line(const std::string& line, std::size_t expected) {
  if (line.size() != expected) throw ParseError("bit string has the wrong length");
  Bits out(expected);
  for (std::size_t i = 0; i < expected; ++i) {
    if (line[i] != '0' && line[i] != '1') throw ParseError("bit strings may only contain 0 and 1");
    out[i] = static_cast<std::uint8_t>(line[i] - '0');
  }
  return out;
}

void write_packed(std::ostream& os, const BoolFn& f) {
  std::string buf((f.size() + 7) / 8, '\0');
  for (std::uint64_t x = 0; x < f.size(); ++x)
    if (f(x)) buf[x / 8] = static_cast<char>(buf[x / 8] | (1 << (x % 8)));
  os.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

BoolFn read_packed(std::istream& is, unsigned k) {
  std::uint64_t n = std::uint64_t{1} << k;
  std::string buf((n + 7) / 8, '\0');
  if (!is.read(buf.data(), static_cast<std::streamsize>(buf.size()))) throw ParseError("proof file truncated");
  std::vector<std::uint8_t> t(n);
  for (std::uint64_t x = 0; x < n; ++x) t[x] = static_cast<std::uint8_t>((static_cast<unsigned char>(buf[x / 8]) >> (x % 8)) & 1U);
  return BoolFn(k, std::move(t));
}

}  // namespace

void write_quadsys(std::ostream& os, const QuadSystem& sys) {
  sys.validate();
  os << "quadsys v1 " << sys.n1 << ' ' << sys.m() << '\n';
  for (const auto& row : sys.A) {
    for (auto bit : row) os << static_cast<char>('0' + bit);
    os << '\n';
  }
  for (auto bit : sys.b) os << static_cast<char>('0' + bit);
  os << '\n';
}

QuadSystem read_quadsys(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw ParseError("empty quadsys stream");
  std::istringstream hs(line);
  std::string magic, version;
  long n1 = -1, m = -1;
  hs >> magic >> version >> n1 >> m;
  if (magic != "quadsys" || version != "v1" || n1 < 0 || m < 0 || n1 > 8) throw ParseError("bad quadsys header: " + line);
  QuadSystem sys;
  sys.n1 = static_cast<unsigned>(n1);
  for (long e = 0; e < m; ++e) {
    if (!std::getline(is, line)) throw ParseError("quadsys stream truncated");
    sys.A.push_back(parse_bit_line(line, static_cast<std::size_t>(n1 * n1)));
  }
  if (!std::getline(is, line)) line.clear();
  sys.b = parse_bit_line(line, static_cast<std::size_t>(m));
  return sys;
}

void write_proof(std::ostream& os, const ExpPcpProof& proof) {
  proof.validate();
  os.write(kProofMagic.data(), kProofMagic.size());
  std::array<char, 4> n{};
  for (int i = 0; i < 4; ++i) n[static_cast<std::size_t>(i)] = static_cast<char>((proof.n1 >> (8 * i)) & 0xFFU);
  os.write(n.data(), n.size());
  write_packed(os, proof.f);
  write_packed(os, proof.g);
}

ExpPcpProof read_proof(std::istream& is) {
  std::array<char, 8> header{};
  if (!is.read(header.data(), header.size())) throw ParseError("proof header truncated");
  if (!std::equal(kProofMagic.begin(), kProofMagic.end(), header.begin())) throw ParseError("bad proof magic");
  unsigned n1 = 0;
  for (int i = 0; i < 4; ++i) n1 |= static_cast<unsigned>(static_cast<unsigned char>(header[4 + static_cast<std::size_t>(i)])) << (8 * i);
  if (n1 * n1 > kMaxTableBits) throw ParseError("proof dimension too large");
  ExpPcpProof p;
  p.n1 = n1;
  p.f = read_packed(is, n1);
  p.g = read_packed(is, n1 * n1);
  return p;
}

}  // namespace pcpkit
