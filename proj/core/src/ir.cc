#include "rfcc/ir.h"

namespace rfcc {

Expr Expr::Const(int64_t v) {
  Expr e;
  e.kind = Kind::kConst;
  e.value = v;
  return e;
}

Expr Expr::Field(std::string path) {
  Expr e;
  e.kind = Kind::kField;
  e.name = std::move(path);
  return e;
}

Expr Expr::Service(std::string name) {
  Expr e;
  e.kind = Kind::kService;
  e.name = std::move(name);
  return e;
}

Expr Expr::Compare(std::string op, Expr lhs, Expr rhs) {
  Expr e;
  e.kind = Kind::kCompare;
  e.name = std::move(op);
  e.args = {std::move(lhs), std::move(rhs)};
  return e;
}

Expr Expr::And(std::vector<Expr> args) {
  Expr e;
  e.kind = Kind::kAnd;
  e.args = std::move(args);
  return e;
}

Expr Expr::Or(std::vector<Expr> args) {
  Expr e;
  e.kind = Kind::kOr;
  e.args = std::move(args);
  return e;
}

Expr Expr::Not(Expr arg) {
  Expr e;
  e.kind = Kind::kNot;
  e.args = {std::move(arg)};
  return e;
}

Instruction Instruction::SetField(std::string dst, Expr value) {
  Instruction i;
  i.kind = Kind::kSetField;
  i.dst = std::move(dst);
  i.value = std::move(value);
  return i;
}

Instruction Instruction::CopyField(std::string dst, std::string src) {
  Instruction i;
  i.kind = Kind::kCopyField;
  i.dst = std::move(dst);
  i.src = std::move(src);
  return i;
}

Instruction Instruction::SwapFields(std::string a, std::string b) {
  Instruction i;
  i.kind = Kind::kSwapFields;
  i.dst = std::move(a);
  i.src = std::move(b);
  return i;
}

Instruction Instruction::ComputeChecksum(std::string dst, ChecksumRange range) {
  Instruction i;
  i.kind = Kind::kComputeChecksum;
  i.dst = std::move(dst);
  i.range = std::move(range);
  return i;
}

Instruction Instruction::If(Expr cond, std::vector<Instruction> then) {
  Instruction i;
  i.kind = Kind::kIf;
  i.value = std::move(cond);
  i.then = std::move(then);
  return i;
}

Instruction Instruction::Call(std::string fn, std::vector<Expr> args) {
  Instruction i;
  i.kind = Kind::kCall;
  i.fn = std::move(fn);
  i.args = std::move(args);
  return i;
}

Instruction Instruction::Comment(std::string text) {
  Instruction i;
  i.kind = Kind::kComment;
  i.text = std::move(text);
  return i;
}

std::string ToString(const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::kConst: return std::to_string(e.value);
    case Expr::Kind::kField: return e.name;
    case Expr::Kind::kService: return e.name + "()";
    case Expr::Kind::kCompare:
      return "(" + ToString(e.args[0]) + " " + e.name + " " + ToString(e.args[1]) + ")";
    case Expr::Kind::kAnd:
    case Expr::Kind::kOr: {
      std::string out = e.kind == Expr::Kind::kAnd ? "and(" : "or(";
      for (size_t i = 0; i < e.args.size(); ++i) {
        if (i) out += ", ";
        out += ToString(e.args[i]);
      }
      return out + ")";
    }
    case Expr::Kind::kNot: return "not(" + ToString(e.args[0]) + ")";
  }
  return "?";
}

namespace {

std::string RangeString(const ChecksumRange& r) {
  std::string end = r.end == ChecksumRange::End::kEndOfHeader    ? "end_of_header"
                    : r.end == ChecksumRange::End::kEndOfMessage ? "end_of_message"
                    : "fixed_bytes(" + std::to_string(r.fixed_bytes) + ")";
  return r.header + "." + r.field + ".." + end;
}

}  // namespace

std::string ToString(const Instruction& in) {
  std::string role = in.role.empty() ? "" : " [" + in.role + "]";
  switch (in.kind) {
    case Instruction::Kind::kSetField:
      return "SetField(" + in.dst + ", " + ToString(in.value) + ")" + role;
    case Instruction::Kind::kCopyField:
      return "CopyField(" + in.dst + ", " + in.src + ")" + role;
    case Instruction::Kind::kSwapFields:
      return "SwapFields(" + in.dst + ", " + in.src + ")" + role;
    case Instruction::Kind::kComputeChecksum:
      return "ComputeChecksum(" + in.dst + ", " + RangeString(in.range) + ")" + role;
    case Instruction::Kind::kIf: {
      std::string out = "If(" + ToString(in.value) + ", [";
      for (size_t i = 0; i < in.then.size(); ++i) {
        if (i) out += ", ";
        out += ToString(in.then[i]);
      }
      return out + "])" + role;
    }
    case Instruction::Kind::kCall: {
      std::string out = "Call(" + in.fn;
      for (const auto& a : in.args) out += ", " + ToString(a);
      return out + ")" + role;
    }
    case Instruction::Kind::kComment:
      return "Comment(" + in.text + ")" + role;
  }
  return "?";
}

}  // namespace rfcc
