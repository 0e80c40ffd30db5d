#include "latentmark/keys.hpp"

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <stdexcept>

#include "latentmark/f2.hpp"
#include "latentmark/rng.hpp"

namespace latentmark {

void PrcParams::validate() const {
  if (g < 1) throw std::invalid_argument("PrcParams: g must be >= 1");
  if (t < 1 || t > n) throw std::invalid_argument("PrcParams: t must be in [1, n]");
  if (r > n - g) throw std::invalid_argument("PrcParams: null space too small (r > n - g)");
  if (!(eta >= 0.0 && eta < 0.5)) throw std::invalid_argument("PrcParams: eta must be in [0, 0.5)");
}

PrcParams PrcParams::defaults_for(std::uint32_t n, std::uint32_t g) {
  PrcParams p;
  p.n = n;
  p.g = g;
  p.t = 3;
  p.r = n - n / 8;
  p.eta = 0.05;
  return p;
}

BitVec SparseParityMatrix::syndrome(const BitVec& x) const {
  BitVec s(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    bool parity = false;
    for (auto c : rows[i]) parity ^= x.get(c);
    s.set(i, parity);
  }
  return s;
}

BitVec GeneratorMatrix::encode(const BitVec& m) const {
  if (m.size() != g) throw std::invalid_argument("GeneratorMatrix::encode: message length != g");
  BitVec c(n);
  for (std::uint32_t j = 0; j < g; ++j)
    if (m.get(j)) c ^= cols[j];
  return c;
}

bool WatermarkKeySet::operator==(const WatermarkKeySet& o) const {
  const bool base = params.n == o.params.n && params.g == o.params.g && params.t == o.params.t &&
                    params.r == o.params.r && params.eta == o.params.eta &&
                    P.n_cols == o.P.n_cols && P.rows == o.P.rows && G.n == o.G.n &&
                    G.g == o.G.g && G.cols == o.G.cols && sk_c == o.sk_c;
  if (!base) return false;
  if (sig_keys.has_value() != o.sig_keys.has_value()) return false;
  if (!sig_keys) return true;
  return sig_keys->sk == o.sig_keys->sk && sig_keys->vk == o.sig_keys->vk;
}

namespace {

std::vector<std::uint32_t> sample_sparse_row(SequentialRng& rng, std::uint32_t n,
                                             std::uint32_t t) {
  std::vector<std::uint32_t> cols;
  cols.reserve(t);
  while (cols.size() < t) {
    const std::uint32_t c = rng.below(n);
    if (std::find(cols.begin(), cols.end(), c) == cols.end()) cols.push_back(c);
  }
  std::sort(cols.begin(), cols.end());
  return cols;
}

BitVec random_bits(SequentialRng& rng, std::size_t nbits) {
  BitVec v(nbits);
  auto& words = v.words();
  for (auto& w : words) w = rng.next();
  if (nbits % 64) words.back() &= (std::uint64_t(1) << (nbits % 64)) - 1;
  return v;
}

/// g independent random combinations of the kernel basis, rejected until
/// every coordinate is covered. A zero row of G would pin that coordinate's
/// encoded bit to the Bernoulli noise, which is both undecodable and
/// visibly non-uniform in the latent audit.
std::vector<BitVec> sample_generator_columns(SequentialRng& rng,
                                             const std::vector<BitVec>& basis,
                                             std::uint32_t n, std::uint32_t g) {
  for (int attempt = 0; attempt < 64; ++attempt) {
    std::vector<BitVec> cols;
    cols.reserve(g);
    for (std::uint32_t j = 0; j < g; ++j) {
      BitVec col(n);
      for (const auto& bvec : basis)
        if (rng.bernoulli(0.5)) col ^= bvec;
      cols.push_back(std::move(col));
    }
    if (f2_rank(cols) != g) continue;
    BitVec covered(n);
    for (const auto& col : cols) {
      auto& cw = covered.words();
      const auto& ow = col.words();
      for (std::size_t w = 0; w < cw.size(); ++w) cw[w] |= ow[w];
    }
    if (covered.popcount() == n) return cols;
  }
  throw std::runtime_error(
      "keygen: degenerate parity-check matrix (kernel does not cover all coordinates); "
      "retry with a new seed or lower r");
}

}  // namespace

WatermarkKeySet keygen(const PrcParams& params, std::uint32_t n_sk, std::uint64_t rng_seed) {
  params.validate();
  SequentialRng rng(rng_seed, /*stream=*/0);

  WatermarkKeySet ks;
  ks.params = params;
  ks.P.n_cols = params.n;
  ks.P.rows.reserve(params.r);
  for (std::uint32_t i = 0; i < params.r; ++i)
    ks.P.rows.push_back(sample_sparse_row(rng, params.n, params.t));

  std::vector<BitVec> dense;
  dense.reserve(params.r);
  for (const auto& row : ks.P.rows) {
    BitVec v(params.n);
    for (auto c : row) v.set(c, true);
    dense.push_back(std::move(v));
  }
  std::vector<BitVec> basis = f2_kernel_basis(std::move(dense), params.n);
  if (basis.size() < params.g)
    throw std::runtime_error("keygen: degenerate parity-check matrix (kernel dimension " +
                             std::to_string(basis.size()) + " < g); retry with a new seed");

  ks.G.n = params.n;
  ks.G.g = params.g;
  ks.G.cols = sample_generator_columns(rng, basis, params.n, params.g);

  ks.sk_c = random_bits(rng, n_sk);
  return ks;
}

EcdsaKeyPair keygen_signature(std::uint64_t rng_seed) {
  SequentialRng rng(rng_seed, /*stream=*/1);
  return ecdsa_keygen(rng);
}

// ---------------------------------------------------------------------------
// Key file format: magic "LWMK", version byte, then little-endian fields.

namespace {

constexpr char kMagic[4] = {'L', 'W', 'M', 'K'};
constexpr std::uint8_t kVersion = 1;

struct Writer {
  std::FILE* f;

  void bytes(const void* p, std::size_t len) {
    if (std::fwrite(p, 1, len, f) != len) throw std::runtime_error("key file: write failed");
  }
  void u8(std::uint8_t v) { bytes(&v, 1); }
  void u32(std::uint32_t v) {
    std::uint8_t b[4] = {std::uint8_t(v), std::uint8_t(v >> 8), std::uint8_t(v >> 16),
                         std::uint8_t(v >> 24)};
    bytes(b, 4);
  }
  void u64(std::uint64_t v) {
    u32(std::uint32_t(v));
    u32(std::uint32_t(v >> 32));
  }
  void f64(double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    u64(bits);
  }
  void blob(const std::vector<std::uint8_t>& v) {
    u32(std::uint32_t(v.size()));
    bytes(v.data(), v.size());
  }
};

struct Reader {
  std::FILE* f;

  void bytes(void* p, std::size_t len, const char* field) {
    if (std::fread(p, 1, len, f) != len)
      throw std::runtime_error(std::string("key file: truncated while reading ") + field);
  }
  std::uint8_t u8(const char* field) {
    std::uint8_t v;
    bytes(&v, 1, field);
    return v;
  }
  std::uint32_t u32(const char* field) {
    std::uint8_t b[4];
    bytes(b, 4, field);
    return std::uint32_t(b[0]) | std::uint32_t(b[1]) << 8 | std::uint32_t(b[2]) << 16 |
           std::uint32_t(b[3]) << 24;
  }
  std::uint64_t u64(const char* field) {
    const std::uint64_t lo = u32(field);
    return lo | std::uint64_t(u32(field)) << 32;
  }
  double f64(const char* field) {
    const std::uint64_t bits = u64(field);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
  }
  std::vector<std::uint8_t> blob(const char* field) {
    const std::uint32_t len = u32(field);
    std::vector<std::uint8_t> v(len);
    bytes(v.data(), len, field);
    return v;
  }
};

void write_u128_be(Writer& w, uint128 v) {
  std::uint8_t b[16];
  for (int i = 15; i >= 0; --i) {
    b[i] = std::uint8_t(v & 0xff);
    v >>= 8;
  }
  w.bytes(b, 16);
}

uint128 read_u128_be(Reader& r, const char* field) {
  std::uint8_t b[16];
  r.bytes(b, 16, field);
  uint128 v = 0;
  for (int i = 0; i < 16; ++i) v = (v << 8) | b[i];
  return v;
}

struct File {
  std::FILE* f;
  explicit File(std::FILE* f) : f(f) {}
  ~File() {
    if (f) std::fclose(f);
  }
  File(const File&) = delete;
  File& operator=(const File&) = delete;
};

}  // namespace

void save_keys(const WatermarkKeySet& ks, const std::string& path) {
  File file(std::fopen(path.c_str(), "wb"));
  if (!file.f) throw std::runtime_error("key file: cannot open for writing: " + path);
  Writer w{file.f};
  w.bytes(kMagic, 4);
  w.u8(kVersion);
  w.u32(ks.params.n);
  w.u32(ks.params.g);
  w.u32(ks.params.t);
  w.u32(ks.params.r);
  w.f64(ks.params.eta);
  for (const auto& row : ks.P.rows)
    for (auto c : row) w.u32(c);
  for (const auto& col : ks.G.cols) w.blob(col.to_bytes());
  w.u32(std::uint32_t(ks.sk_c.size()));
  {
    const auto bytes = ks.sk_c.to_bytes();
    w.bytes(bytes.data(), bytes.size());
  }
  w.u8(ks.sig_keys ? 1 : 0);
  if (ks.sig_keys) {
    write_u128_be(w, ks.sig_keys->sk);
    write_u128_be(w, ks.sig_keys->vk.x);
    write_u128_be(w, ks.sig_keys->vk.y);
  }
}

WatermarkKeySet load_keys(const std::string& path) {
  File file(std::fopen(path.c_str(), "rb"));
  if (!file.f) throw std::runtime_error("key file: cannot open: " + path);
  Reader r{file.f};
  char magic[4];
  r.bytes(magic, 4, "magic");
  if (std::memcmp(magic, kMagic, 4) != 0)
    throw std::runtime_error("key file: bad magic (wrong file type or version)");
  const std::uint8_t version = r.u8("version");
  if (version != kVersion)
    throw std::runtime_error("key file: unsupported version " + std::to_string(version));

  WatermarkKeySet ks;
  ks.params.n = r.u32("params.n");
  ks.params.g = r.u32("params.g");
  ks.params.t = r.u32("params.t");
  ks.params.r = r.u32("params.r");
  ks.params.eta = r.f64("params.eta");
  ks.params.validate();

  ks.P.n_cols = ks.params.n;
  ks.P.rows.resize(ks.params.r);
  for (auto& row : ks.P.rows) {
    row.resize(ks.params.t);
    for (auto& c : row) {
      c = r.u32("P row entry");
      if (c >= ks.params.n) throw std::runtime_error("key file: P column index out of range");
    }
  }

  ks.G.n = ks.params.n;
  ks.G.g = ks.params.g;
  ks.G.cols.reserve(ks.params.g);
  for (std::uint32_t j = 0; j < ks.params.g; ++j) {
    const auto bytes = r.blob("G column");
    if (bytes.size() != (ks.params.n + 7) / 8)
      throw std::runtime_error("key file: G column has wrong length");
    ks.G.cols.push_back(BitVec::from_bytes(bytes, ks.params.n));
  }

  const std::uint32_t n_sk = r.u32("sk_c length");
  std::vector<std::uint8_t> sk_bytes((n_sk + 7) / 8);
  r.bytes(sk_bytes.data(), sk_bytes.size(), "sk_c");
  ks.sk_c = BitVec::from_bytes(sk_bytes, n_sk);

  if (r.u8("signature key flag")) {
    EcdsaKeyPair kp;
    kp.sk = read_u128_be(r, "signing key");
    kp.vk.x = read_u128_be(r, "verification key x");
    kp.vk.y = read_u128_be(r, "verification key y");
    kp.vk.inf = false;
    if (!secp112r1::on_curve(kp.vk))
      throw std::runtime_error("key file: verification key is not on the curve");
    ks.sig_keys = kp;
  }
  return ks;
}

// ---------------------------------------------------------------------------
// User database

void UserDatabase::assign(std::uint32_t user_id, std::uint32_t user_info,
                          std::optional<EcdsaSignature> signature) {
  if (records_.count(user_id))
    throw std::invalid_argument("user database: duplicate user_id " + std::to_string(user_id));
  records_[user_id] = UserRecord{user_info, signature};
}

const UserRecord& UserDatabase::lookup(std::uint32_t user_id) const {
  auto it = records_.find(user_id);
  if (it == records_.end())
    throw std::out_of_range("user database: user_id " + std::to_string(user_id) + " not found");
  return it->second;
}

namespace {

std::string hex_of(const std::uint8_t* data, std::size_t len) {
  static const char* digits = "0123456789abcdef";
  std::string s;
  s.reserve(len * 2);
  for (std::size_t i = 0; i < len; ++i) {
    s.push_back(digits[data[i] >> 4]);
    s.push_back(digits[data[i] & 0xf]);
  }
  return s;
}

int hex_nibble(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

std::vector<std::uint8_t> parse_hex(const std::string& s, const char* field) {
  if (s.size() % 2)
    throw std::runtime_error(std::string("user database: odd hex length in ") + field);
  std::vector<std::uint8_t> out(s.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const int hi = hex_nibble(s[2 * i]), lo = hex_nibble(s[2 * i + 1]);
    if (hi < 0 || lo < 0)
      throw std::runtime_error(std::string("user database: bad hex digit in ") + field);
    out[i] = std::uint8_t(hi << 4 | lo);
  }
  return out;
}

}  // namespace

void save_db(const UserDatabase& db, const std::string& path) {
  File file(std::fopen(path.c_str(), "w"));
  if (!file.f) throw std::runtime_error("user database: cannot open for writing: " + path);
  for (const auto& [id, rec] : db.records()) {
    std::uint8_t info_be[4] = {std::uint8_t(rec.user_info >> 24), std::uint8_t(rec.user_info >> 16),
                               std::uint8_t(rec.user_info >> 8), std::uint8_t(rec.user_info)};
    std::string line = std::to_string(id) + "," + hex_of(info_be, 4);
    if (rec.signature) line += "," + hex_of(rec.signature->data(), rec.signature->size());
    line += "\n";
    if (std::fputs(line.c_str(), file.f) == EOF)
      throw std::runtime_error("user database: write failed");
  }
}

UserDatabase load_db(const std::string& path) {
  File file(std::fopen(path.c_str(), "r"));
  if (!file.f) throw std::runtime_error("user database: cannot open: " + path);
  UserDatabase db;
  char buf[256];
  int line_no = 0;
  while (std::fgets(buf, sizeof(buf), file.f)) {
    ++line_no;
    std::string line(buf);
    while (!line.empty() && (line.back() == '\n' || line.back() == '\r')) line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> parts;
    std::size_t pos = 0;
    while (pos <= line.size()) {
      const std::size_t comma = line.find(',', pos);
      parts.push_back(line.substr(pos, comma == std::string::npos ? comma : comma - pos));
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (parts.size() < 2 || parts.size() > 3)
      throw std::runtime_error("user database: malformed line " + std::to_string(line_no));
    const std::uint32_t id = std::uint32_t(std::stoul(parts[0]));
    const auto info_bytes = parse_hex(parts[1], "user_info");
    if (info_bytes.size() != 4)
      throw std::runtime_error("user database: user_info must be 8 hex chars (line " +
                               std::to_string(line_no) + ")");
    const std::uint32_t info = std::uint32_t(info_bytes[0]) << 24 |
                               std::uint32_t(info_bytes[1]) << 16 |
                               std::uint32_t(info_bytes[2]) << 8 | std::uint32_t(info_bytes[3]);
    std::optional<EcdsaSignature> sig;
    if (parts.size() == 3) {
      const auto sig_bytes = parse_hex(parts[2], "signature");
      if (sig_bytes.size() != 28)
        throw std::runtime_error("user database: signature must be 56 hex chars (line " +
                                 std::to_string(line_no) + ")");
      EcdsaSignature s;
      std::copy(sig_bytes.begin(), sig_bytes.end(), s.begin());
      sig = s;
    }
    db.assign(id, info, sig);
  }
  return db;
}

}  // namespace latentmark
