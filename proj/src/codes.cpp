#include "rapsk/codes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <unordered_set>

#include "rapsk/rng.hpp"

namespace rapsk {

namespace {
constexpr double kMinSumScale = 0.75;
// Message magnitude cap.  A degree-1 check (accumulator row 0 when no info
// column lands on it) has no second minimum; the cap turns its "pin to zero"
// message finite so later iterations never form inf - inf.
constexpr double kMaxMsg = 1e12;
}

const std::vector<CodeRate>& available_rates() {
  static const std::vector<CodeRate> rates = {
      {0, 1}, {1, 4}, {1, 3}, {2, 5}, {1, 2}, {3, 5},
      {2, 3}, {3, 4}, {4, 5}, {5, 6}, {8, 9}, {1, 1}};
  return rates;
}

ComponentCode ComponentCode::uncoded(int block_len) {
  if (block_len < 1) throw std::invalid_argument("uncoded: block_len < 1");
  ComponentCode c;
  c.kind_ = CodeKind::Uncoded;
  c.t_ = c.h_ = block_len;
  c.rate_ = {1, 1};
  return c;
}

ComponentCode ComponentCode::skip(int block_len) {
  if (block_len < 1) throw std::invalid_argument("skip: block_len < 1");
  ComponentCode c;
  c.kind_ = CodeKind::Skip;
  c.t_ = block_len;
  c.h_ = 0;
  c.rate_ = {0, 1};
  return c;
}

ComponentCode ComponentCode::repetition(int block_len, int factor) {
  if (block_len < 1 || factor < 1 || block_len % factor != 0)
    throw std::invalid_argument("repetition: factor must divide block_len");
  ComponentCode c;
  c.kind_ = CodeKind::Repetition;
  c.t_ = block_len;
  c.factor_ = factor;
  c.h_ = block_len / factor;
  c.rate_ = {1, factor};
  return c;
}

ComponentCode ComponentCode::ira_ldpc(CodeRate rate, int block_len,
                                      uint64_t seed, int max_iters) {
  const bool known = std::any_of(
      available_rates().begin(), available_rates().end(),
      [&](const CodeRate& r) { return r == rate; });
  if (!known || rate.num == 0 || rate.num == rate.den)
    throw std::invalid_argument("ira_ldpc: rate not in the coded ladder");
  if (block_len < 256) throw std::invalid_argument("ira_ldpc: block_len < 256");
  if (max_iters < 1) throw std::invalid_argument("ira_ldpc: max_iters < 1");
  ComponentCode c;
  c.kind_ = CodeKind::IraLdpc;
  c.t_ = block_len;
  c.h_ = static_cast<int>(
      std::llround(static_cast<double>(block_len) * rate.num / rate.den));
  c.rate_ = rate;
  c.max_iters_ = max_iters;
  if (c.h_ < 1 || block_len - c.h_ < 5)
    throw std::invalid_argument("ira_ldpc: infeasible dimensions");
  c.build_ldpc(seed);
  return c;
}

ComponentCode ComponentCode::for_rate(CodeRate rate, int block_len,
                                      uint64_t seed, int max_iters) {
  if (rate.num == 0) return skip(block_len);
  if (rate.num == rate.den) return uncoded(block_len);
  return ira_ldpc(rate, block_len, seed, max_iters);
}

void ComponentCode::build_ldpc(uint64_t seed) {
  const int p = t_ - h_;
  RandomStream rng(mix64(seed) ^
                   mix64((static_cast<uint64_t>(t_) << 24) |
                         (static_cast<uint64_t>(rate_.num) << 12) |
                         static_cast<uint64_t>(rate_.den)));
  // Column weight 3, rows pairwise non-adjacent (adjacent rows share an
  // accumulator column and would close a 4-cycle), and no row pair reused
  // across columns.  Both constraints are best-effort under a bounded retry
  // budget; at very high rate or short T the pair-reuse rule is relaxed
  // first, then adjacency.
  std::unordered_set<uint64_t> used_pairs;
  const auto pair_key = [&](int a, int b) {
    return static_cast<uint64_t>(std::min(a, b)) << 32 |
           static_cast<uint64_t>(std::max(a, b));
  };
  col_rows_.assign(static_cast<std::size_t>(3) * h_, 0);
  int rows[3];
  for (int col = 0; col < h_; ++col) {
    bool placed = false;
    for (int attempt = 0; attempt < 200 && !placed; ++attempt) {
      for (int j = 0; j < 3; ++j)
        rows[j] = static_cast<int>(rng.next_u64() % static_cast<uint64_t>(p));
      std::sort(rows, rows + 3);
      if (rows[1] - rows[0] < 2 || rows[2] - rows[1] < 2) continue;
      const bool relax_pairs = attempt >= 150;
      if (!relax_pairs && (used_pairs.count(pair_key(rows[0], rows[1])) ||
                           used_pairs.count(pair_key(rows[0], rows[2])) ||
                           used_pairs.count(pair_key(rows[1], rows[2]))))
        continue;
      placed = true;
    }
    if (!placed) {
      // Last resort: any three distinct rows (needs p >= 3, guaranteed).
      do {
        for (int j = 0; j < 3; ++j)
          rows[j] = static_cast<int>(rng.next_u64() % static_cast<uint64_t>(p));
        std::sort(rows, rows + 3);
      } while (rows[0] == rows[1] || rows[1] == rows[2]);
    }
    for (int j = 0; j < 3; ++j) {
      used_pairs.insert(pair_key(rows[j], rows[(j + 1) % 3]));
      col_rows_[static_cast<std::size_t>(3) * col + j] = rows[j];
    }
  }

  // Flatten check adjacency: info edges plus the dual-diagonal accumulator
  // (check i touches parity vars h+i and h+i-1).
  std::vector<int> deg(p, 0);
  for (int e = 0; e < 3 * h_; ++e) ++deg[col_rows_[e]];
  for (int i = 0; i < p; ++i) deg[i] += (i == 0) ? 1 : 2;
  check_ptr_.assign(p + 1, 0);
  for (int i = 0; i < p; ++i) check_ptr_[i + 1] = check_ptr_[i] + deg[i];
  max_check_deg_ = *std::max_element(deg.begin(), deg.end());
  check_vars_.assign(check_ptr_.back(), -1);
  std::vector<int> fill(check_ptr_.begin(), check_ptr_.end() - 1);
  for (int col = 0; col < h_; ++col)
    for (int j = 0; j < 3; ++j)
      check_vars_[fill[col_rows_[static_cast<std::size_t>(3) * col + j]]++] =
          col;
  for (int i = 0; i < p; ++i) {
    if (i > 0) check_vars_[fill[i]++] = h_ + i - 1;
    check_vars_[fill[i]++] = h_ + i;
  }
}

std::vector<uint8_t> ComponentCode::encode(
    std::span<const uint8_t> info) const {
  if (static_cast<int>(info.size()) != h_)
    throw std::invalid_argument("encode: wrong info length");
  std::vector<uint8_t> word(t_, 0);
  switch (kind_) {
    case CodeKind::Skip:
      break;
    case CodeKind::Uncoded:
      std::copy(info.begin(), info.end(), word.begin());
      break;
    case CodeKind::Repetition:
      for (int i = 0; i < h_; ++i)
        for (int j = 0; j < factor_; ++j) word[i * factor_ + j] = info[i];
      break;
    case CodeKind::IraLdpc: {
      std::copy(info.begin(), info.end(), word.begin());
      const int p = t_ - h_;
      std::vector<uint8_t> s(p, 0);
      for (int col = 0; col < h_; ++col)
        if (info[col])
          for (int j = 0; j < 3; ++j)
            s[col_rows_[static_cast<std::size_t>(3) * col + j]] ^= 1;
      uint8_t acc = 0;
      for (int i = 0; i < p; ++i) {
        acc ^= s[i];
        word[h_ + i] = acc;
      }
      break;
    }
  }
  return word;
}

bool ComponentCode::syndrome_ok(std::span<const uint8_t> word) const {
  if (static_cast<int>(word.size()) != t_)
    throw std::invalid_argument("syndrome_ok: wrong length");
  switch (kind_) {
    case CodeKind::Uncoded:
      return true;
    case CodeKind::Skip:
      return std::all_of(word.begin(), word.end(),
                         [](uint8_t b) { return b == 0; });
    case CodeKind::Repetition:
      for (int i = 0; i < h_; ++i)
        for (int j = 1; j < factor_; ++j)
          if (word[i * factor_ + j] != word[i * factor_]) return false;
      return true;
    case CodeKind::IraLdpc: {
      const int p = t_ - h_;
      for (int i = 0; i < p; ++i) {
        uint8_t parity = 0;
        for (int e = check_ptr_[i]; e < check_ptr_[i + 1]; ++e)
          parity ^= word[check_vars_[e]];
        if (parity) return false;
      }
      return true;
    }
  }
  return false;
}

void ComponentCode::check_pass(std::span<const double> posterior,
                               std::vector<double>& r,
                               std::vector<double>& scratch) const {
  const int p = t_ - h_;
  for (int c = 0; c < p; ++c) {
    const int beg = check_ptr_[c], end = check_ptr_[c + 1];
    double min1 = std::numeric_limits<double>::infinity(), min2 = min1;
    int argmin = beg;
    bool sign_all = false;  // parity of negative count
    for (int e = beg; e < end; ++e) {
      const double q = posterior[check_vars_[e]] - r[e];
      scratch[e - beg] = q;
      const double mag = std::abs(q);
      if (q < 0.0) sign_all = !sign_all;
      if (mag < min1) {
        min2 = min1;
        min1 = mag;
        argmin = e;
      } else if (mag < min2) {
        min2 = mag;
      }
    }
    min1 = std::min(min1, kMaxMsg);
    min2 = std::min(min2, kMaxMsg);
    for (int e = beg; e < end; ++e) {
      const double q = scratch[e - beg];
      const bool sign_excl = (q < 0.0) ? !sign_all : sign_all;
      const double mag = (e == argmin) ? min2 : min1;
      r[e] = (sign_excl ? -kMinSumScale : kMinSumScale) * mag;
    }
  }
}

DecodeResult ComponentCode::decode_soft(std::span<const double> llrs) const {
  if (static_cast<int>(llrs.size()) != t_)
    throw std::invalid_argument("decode_soft: wrong LLR count");
  DecodeResult out;
  switch (kind_) {
    case CodeKind::Skip:
      out.codeword.assign(t_, 0);
      return out;
    case CodeKind::Uncoded: {
      out.info.resize(t_);
      for (int i = 0; i < t_; ++i) out.info[i] = llrs[i] < 0.0;
      out.codeword = out.info;
      return out;
    }
    case CodeKind::Repetition: {
      out.info.resize(h_);
      for (int i = 0; i < h_; ++i) {
        double sum = 0.0;
        for (int j = 0; j < factor_; ++j) sum += llrs[i * factor_ + j];
        out.info[i] = sum < 0.0;
      }
      out.codeword = encode(out.info);
      return out;
    }
    case CodeKind::IraLdpc:
      break;
  }

  std::vector<double> posterior(llrs.begin(), llrs.end());
  std::vector<double> r(check_vars_.size(), 0.0);
  std::vector<double> scratch(max_check_deg_);
  std::vector<uint8_t> hard(t_);
  const auto decide = [&] {
    for (int i = 0; i < t_; ++i) hard[i] = posterior[i] < 0.0;
  };
  decide();
  out.converged = syndrome_ok(hard);
  for (int it = 0; it < max_iters_ && !out.converged; ++it) {
    check_pass(posterior, r, scratch);
    std::copy(llrs.begin(), llrs.end(), posterior.begin());
    for (std::size_t e = 0; e < check_vars_.size(); ++e)
      posterior[check_vars_[e]] += r[e];
    decide();
    out.iterations = it + 1;
    out.converged = syndrome_ok(hard);
  }
  out.info.assign(hard.begin(), hard.begin() + h_);
  out.codeword = out.converged ? std::move(hard) : encode(out.info);
  return out;
}

void ComponentCode::export_alist(std::ostream& os) const {
  if (kind_ != CodeKind::IraLdpc)
    throw std::invalid_argument("export_alist: only IRA-LDPC has a matrix");
  const int p = t_ - h_;
  std::vector<std::vector<int>> cols(t_);
  for (int col = 0; col < h_; ++col)
    for (int j = 0; j < 3; ++j)
      cols[col].push_back(col_rows_[static_cast<std::size_t>(3) * col + j]);
  for (int i = 0; i < p; ++i) {
    cols[h_ + i].push_back(i);
    if (i + 1 < p) cols[h_ + i].push_back(i + 1);
  }
  std::size_t max_col = 0;
  for (const auto& c : cols) max_col = std::max(max_col, c.size());
  os << t_ << ' ' << p << '\n';
  os << max_col << ' ' << max_check_deg_ << '\n';
  for (int v = 0; v < t_; ++v) os << cols[v].size() << (v + 1 < t_ ? ' ' : '\n');
  for (int c = 0; c < p; ++c)
    os << (check_ptr_[c + 1] - check_ptr_[c]) << (c + 1 < p ? ' ' : '\n');
  for (int v = 0; v < t_; ++v) {
    for (std::size_t j = 0; j < max_col; ++j)
      os << (j < cols[v].size() ? cols[v][j] + 1 : 0)
         << (j + 1 < max_col ? ' ' : '\n');
  }
  for (int c = 0; c < p; ++c) {
    const int deg = check_ptr_[c + 1] - check_ptr_[c];
    for (int j = 0; j < max_check_deg_; ++j)
      os << (j < deg ? check_vars_[check_ptr_[c] + j] + 1 : 0)
         << (j + 1 < max_check_deg_ ? ' ' : '\n');
  }
}

ComponentCode build_ira_ldpc(CodeRate rate, int block_len, uint64_t seed,
                             int max_iters) {
  return ComponentCode::ira_ldpc(rate, block_len, seed, max_iters);
}

}  // namespace rapsk
