#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace rapsk {

enum class CodeKind { Uncoded, Repetition, IraLdpc, Skip };

struct CodeRate {
  int num = 1;
  int den = 1;
  double value() const { return static_cast<double>(num) / den; }
  friend bool operator==(const CodeRate&, const CodeRate&) = default;
};

// Fixed rate ladder, ascending: {0, 1/4, 1/3, 2/5, 1/2, 3/5, 2/3, 3/4, 4/5,
// 5/6, 8/9, 1}.  0 = skip level, 1 = uncoded, the 10 interior rates are
// IRA-LDPC.
const std::vector<CodeRate>& available_rates();

struct DecodeResult {
  std::vector<uint8_t> info;
  std::vector<uint8_t> codeword;  // always consistent with info
  bool converged = true;          // LDPC: zero syndrome reached
  int iterations = 0;
};

// A binary component code of block length T.  Value type; immutable and
// reentrant after construction.  LLR convention: positive <=> bit 0, ties
// decide 0.
class ComponentCode {
 public:
  static ComponentCode uncoded(int block_len);
  static ComponentCode skip(int block_len);
  static ComponentCode repetition(int block_len, int factor);
  static ComponentCode ira_ldpc(CodeRate rate, int block_len, uint64_t seed,
                                int max_iters = 50);
  // Dispatch on the ladder value: 0 -> skip, 1 -> uncoded, else IRA-LDPC.
  static ComponentCode for_rate(CodeRate rate, int block_len, uint64_t seed,
                                int max_iters = 50);

  CodeKind kind() const { return kind_; }
  int block_len() const { return t_; }
  int info_len() const { return h_; }
  double rate() const { return static_cast<double>(h_) / t_; }
  CodeRate nominal_rate() const { return rate_; }

  std::vector<uint8_t> encode(std::span<const uint8_t> info) const;
  DecodeResult decode_soft(std::span<const double> llrs) const;
  bool syndrome_ok(std::span<const uint8_t> word) const;

  // Parity-check matrix in alist text format (IRA-LDPC only).
  void export_alist(std::ostream& os) const;

 private:
  ComponentCode() = default;
  void build_ldpc(uint64_t seed);
  void check_pass(std::span<const double> posterior, std::vector<double>& r,
                  std::vector<double>& scratch) const;

  CodeKind kind_ = CodeKind::Uncoded;
  int t_ = 0;
  int h_ = 0;
  int factor_ = 1;  // Repetition
  CodeRate rate_{1, 1};
  int max_iters_ = 50;

  // IRA-LDPC: info part as 3 sorted rows per column; checks flattened.
  std::vector<int> col_rows_;
  std::vector<int> check_ptr_;
  std::vector<int> check_vars_;
  int max_check_deg_ = 0;
};

ComponentCode build_ira_ldpc(CodeRate rate, int block_len, uint64_t seed,
                             int max_iters = 50);

}  // namespace rapsk
