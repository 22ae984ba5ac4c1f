// Packet-program IR produced by codegen and interpreted by the runtime.
#ifndef RFCC_IR_H_
#define RFCC_IR_H_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "rfcc/header_layout.h"

namespace rfcc {

// Field paths are "<header>.<field>" for headers of the packet being built
// ("icmp.type", "ip.src_addr"), "orig.<header>.<field>" for the received
// packet, and bare or dotted names ("peer.timer", "client_mode") for state
// variables. "icmp.data" is the message payload; "orig.header_and_64_bits"
// is the received IP header plus the first 64 bits of its data.
struct Expr {
  enum class Kind { kConst, kField, kService, kCompare, kAnd, kOr, kNot };

  Kind kind = Kind::kConst;
  int64_t value = 0;
  std::string name;  // field path, service name, or comparison operator
  std::vector<Expr> args;

  static Expr Const(int64_t v);
  static Expr Field(std::string path);
  static Expr Service(std::string name);
  static Expr Compare(std::string op, Expr lhs, Expr rhs);
  static Expr And(std::vector<Expr> args);
  static Expr Or(std::vector<Expr> args);
  static Expr Not(Expr arg);

  bool operator==(const Expr&) const = default;
};

struct ChecksumRange {
  enum class End { kEndOfHeader, kEndOfMessage, kFixedBytes };

  std::string header;  // header instance name, e.g. "icmp"
  std::string field;   // start anchor field key, e.g. "type"
  End end = End::kEndOfMessage;
  size_t fixed_bytes = 0;

  bool operator==(const ChecksumRange&) const = default;
};

struct Instruction {
  enum class Kind {
    kSetField,
    kCopyField,
    kSwapFields,
    kComputeChecksum,
    kIf,
    kCall,
    kComment,
  };

  Kind kind = Kind::kComment;
  std::string dst;  // SetField/CopyField/ComputeChecksum target, Swap first
  std::string src;  // CopyField source, Swap second
  Expr value;       // SetField value, If condition
  ChecksumRange range;
  std::vector<Instruction> then;
  std::string fn;  // Call target
  std::vector<Expr> args;
  std::string text;  // Comment
  // Restricts the instruction to one role's unit; empty follows the sentence.
  std::string role;

  static Instruction SetField(std::string dst, Expr value);
  static Instruction CopyField(std::string dst, std::string src);
  static Instruction SwapFields(std::string a, std::string b);
  static Instruction ComputeChecksum(std::string dst, ChecksumRange range);
  static Instruction If(Expr cond, std::vector<Instruction> then);
  static Instruction Call(std::string fn, std::vector<Expr> args = {});
  static Instruction Comment(std::string text);

  bool operator==(const Instruction&) const = default;
};

struct FunctionUnit {
  std::string name;
  std::string protocol;
  std::string message;
  std::string role;
  int layout = -1;  // index into PacketProgram::layouts, -1 for none
  std::vector<Instruction> advice_before;
  std::vector<Instruction> body;
};

struct PacketProgram {
  std::map<std::string, FunctionUnit> units;
  std::vector<HeaderLayout> layouts;
};

std::string ToString(const Expr& e);
std::string ToString(const Instruction& in);

}  // namespace rfcc

#endif  // RFCC_IR_H_
