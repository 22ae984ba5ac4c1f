#include "rfcc/packet_runtime.h"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>

namespace rfcc {

uint16_t OnesComplementSum(std::span<const uint8_t> span) {
  uint32_t sum = 0;
  size_t i = 0;
  for (; i + 1 < span.size(); i += 2) sum += (uint32_t{span[i]} << 8) | span[i + 1];
  if (i < span.size()) sum += uint32_t{span[i]} << 8;
  while (sum >> 16) sum = (sum & 0xFFFF) + (sum >> 16);
  return static_cast<uint16_t>(sum);
}

uint16_t OnesComplementChecksum(std::span<const uint8_t> span) {
  return static_cast<uint16_t>(~OnesComplementSum(span));
}

uint64_t GetBits(std::span<const uint8_t> buf, int offset_bits, int width_bits) {
  uint64_t v = 0;
  for (int i = 0; i < width_bits; ++i) {
    int bit = offset_bits + i;
    v = (v << 1) | ((buf[bit / 8] >> (7 - bit % 8)) & 1u);
  }
  return v;
}

void SetBits(std::span<uint8_t> buf, int offset_bits, int width_bits, uint64_t value) {
  for (int i = 0; i < width_bits; ++i) {
    int bit = offset_bits + i;
    uint8_t mask = static_cast<uint8_t>(1u << (7 - bit % 8));
    if ((value >> (width_bits - 1 - i)) & 1u) {
      buf[bit / 8] |= mask;
    } else {
      buf[bit / 8] &= static_cast<uint8_t>(~mask);
    }
  }
}

// ---------------------------------------------------------------------------
// Headers and packets

HeaderInstance::HeaderInstance(std::string name, HeaderLayout layout)
    : name_(std::move(name)), layout_(std::move(layout)), bytes_(layout_.TotalBytes()) {}

int HeaderInstance::Index(std::string_view key) const {
  int i = layout_.IndexOf(key);
  if (i < 0) throw RuntimeError("no field '" + std::string(key) + "' in " + name_);
  return i;
}

uint64_t HeaderInstance::Get(std::string_view key) const {
  int i = Index(key);
  return GetBits(bytes_, layout_.OffsetBits(i), layout_.fields[i].width_bits);
}

void HeaderInstance::Set(std::string_view key, uint64_t value) {
  int i = Index(key);
  SetBits(bytes_, layout_.OffsetBits(i), layout_.fields[i].width_bits, value);
}

int HeaderInstance::FieldByteOffset(std::string_view key) const {
  return layout_.OffsetBits(Index(key)) / 8;
}

std::vector<uint8_t> Packet::Serialize() const {
  std::vector<uint8_t> out;
  for (const auto& h : headers) out.insert(out.end(), h.bytes().begin(), h.bytes().end());
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

size_t Packet::size() const {
  size_t n = payload.size();
  for (const auto& h : headers) n += h.bytes().size();
  return n;
}

HeaderInstance* Packet::Find(std::string_view name) {
  for (auto& h : headers)
    if (h.name() == name) return &h;
  return nullptr;
}

const HeaderInstance* Packet::Find(std::string_view name) const {
  for (const auto& h : headers)
    if (h.name() == name) return &h;
  return nullptr;
}

size_t Packet::HeaderOffset(std::string_view name) const {
  size_t off = 0;
  for (const auto& h : headers) {
    if (h.name() == name) return off;
    off += h.bytes().size();
  }
  throw RuntimeError("packet has no header '" + std::string(name) + "'");
}

Packet ParsePacket(std::span<const uint8_t> bytes,
                   const std::vector<std::pair<std::string, HeaderLayout>>& layouts) {
  Packet p;
  size_t off = 0;
  for (const auto& [name, layout] : layouts) {
    HeaderInstance h(name, layout);
    size_t n = h.bytes().size();
    if (off + n > bytes.size()) throw RuntimeError("packet too short for header " + name);
    std::copy(bytes.begin() + off, bytes.begin() + off + n, h.bytes().begin());
    off += n;
    p.headers.push_back(std::move(h));
  }
  p.payload.assign(bytes.begin() + off, bytes.end());
  return p;
}

ByteSpan ResolveRange(const Packet& packet, const ChecksumRange& range) {
  const HeaderInstance* h = packet.Find(range.header);
  if (!h) throw RuntimeError("checksum range header '" + range.header + "' not in packet");
  size_t header_off = packet.HeaderOffset(range.header);
  ByteSpan s;
  s.begin = header_off + h->FieldByteOffset(range.field);
  switch (range.end) {
    case ChecksumRange::End::kEndOfHeader:
      s.end = header_off + h->bytes().size();
      break;
    case ChecksumRange::End::kEndOfMessage:
      s.end = packet.size();
      break;
    case ChecksumRange::End::kFixedBytes:
      s.end = std::min(packet.size(), s.begin + range.fixed_bytes);
      break;
  }
  return s;
}

bool VerifyChecksum(const Packet& packet, const ChecksumRange& range) {
  std::vector<uint8_t> bytes = packet.Serialize();
  ByteSpan s = ResolveRange(packet, range);
  return OnesComplementSum(std::span(bytes).subspan(s.begin, s.end - s.begin)) == 0xFFFF;
}

// ---------------------------------------------------------------------------
// Services

FixedServices::FixedServices(uint32_t interface_address, uint32_t start_ms,
                             uint32_t tick_ms)
    : address_(interface_address), now_ms_(start_ms), tick_ms_(tick_ms) {}

uint32_t FixedServices::MillisSinceMidnightUt() const {
  uint32_t t = now_ms_;
  now_ms_ = (now_ms_ + tick_ms_) % 86400000u;
  return t;
}

uint32_t FixedServices::GatewayFor(uint32_t) const { return gateway_; }

// ---------------------------------------------------------------------------
// Interpreter

std::string LayerName(std::string_view protocol) { return FieldKey(protocol); }

Packet NewPacket(const HeaderLayout& layout, const ServiceProvider* services) {
  Packet p;
  HeaderInstance ip("ip", Ipv4Layout());
  ip.Set("version", 4);
  ip.Set("ihl", 5);
  ip.Set("ttl", 64);
  std::string layer = LayerName(layout.protocol);
  ip.Set("protocol", layer == "icmp" ? 1 : layer == "igmp" ? 2 : 0);
  if (services) ip.Set("src_addr", services->InterfaceAddress());
  p.headers.push_back(std::move(ip));
  p.headers.emplace_back(layer, layout);
  return p;
}

void FinalizeIpv4(Packet& packet) {
  HeaderInstance* ip = packet.Find("ip");
  if (!ip) return;
  ip->Set("total_length", packet.size());
  ip->Set("header_checksum", 0);
  ip->Set("header_checksum", OnesComplementChecksum(ip->bytes()));
}

namespace {

constexpr std::string_view kOrig = "orig.";
constexpr std::string_view kHeaderAnd64 = "header_and_64_bits";

class Interpreter {
 public:
  Interpreter(Packet& out, const Packet* orig, const ExecOptions& opt)
      : out_(out), orig_(orig), opt_(opt) {}

  void Run(const std::vector<Instruction>& code, const char* phase) {
    for (const auto& in : code) Exec(in, phase);
  }

 private:
  struct Ref {
    Packet* packet = nullptr;
    const Packet* cpacket = nullptr;
    HeaderInstance* header = nullptr;
    const HeaderInstance* cheader = nullptr;
    std::string field;
    bool payload = false;
    bool header_and_64 = false;
    std::string state;
  };

  Ref Resolve(const std::string& path, bool write) {
    Ref r;
    std::string p = path;
    const Packet* src = &out_;
    bool orig = p.rfind(kOrig, 0) == 0;
    if (orig) {
      if (write) throw RuntimeError("cannot write received packet field " + path);
      if (!orig_) throw RuntimeError("no received packet for " + path);
      src = orig_;
      p = p.substr(kOrig.size());
      if (p == kHeaderAnd64) {
        r.cpacket = src;
        r.header_and_64 = true;
        return r;
      }
    }
    size_t dot = p.find('.');
    if (dot != std::string::npos) {
      std::string hname = p.substr(0, dot);
      std::string field = p.substr(dot + 1);
      const HeaderInstance* h = src->Find(hname);
      if (h) {
        r.cpacket = src;
        if (!orig) r.packet = &out_;
        if (field == "data") {
          r.payload = true;
          return r;
        }
        if (!h->Has(field)) throw RuntimeError("unresolved field " + path);
        r.cheader = h;
        if (!orig) r.header = out_.Find(hname);
        r.field = field;
        return r;
      }
      if (orig) throw RuntimeError("unresolved field " + path);
    }
    if (!opt_.state) throw RuntimeError("unresolved field " + path);
    if (!write && !opt_.state->count(p)) throw RuntimeError("unresolved field " + path);
    r.state = p;
    return r;
  }

  int64_t Read(const std::string& path) {
    Ref r = Resolve(path, false);
    if (r.cheader) return static_cast<int64_t>(r.cheader->Get(r.field));
    if (!r.state.empty()) return opt_.state->at(r.state);
    throw RuntimeError("field " + path + " is not a scalar");
  }

  std::vector<uint8_t> ReadBytes(const std::string& path) {
    Ref r = Resolve(path, false);
    if (r.payload) return r.cpacket->payload;
    if (r.header_and_64) {
      std::vector<uint8_t> bytes = r.cpacket->Serialize();
      const HeaderInstance* ip = r.cpacket->Find("ip");
      size_t n = (ip ? ip->bytes().size() : 0) + 8;
      bytes.resize(std::min(bytes.size(), n));
      return bytes;
    }
    throw RuntimeError("field " + path + " is not a byte string");
  }

  void Write(const std::string& path, int64_t value) {
    Ref r = Resolve(path, true);
    if (r.header) {
      r.header->Set(r.field, static_cast<uint64_t>(value));
    } else if (!r.state.empty()) {
      (*opt_.state)[r.state] = value;
    } else {
      throw RuntimeError("field " + path + " is not a scalar");
    }
  }

  int64_t Service(const std::string& name) {
    const ServiceProvider* s = opt_.services;
    if (!s) throw RuntimeError("no service provider for " + name);
    if (name == "interface_address") return s->InterfaceAddress();
    if (name == "timestamp") return s->MillisSinceMidnightUt();
    if (name == "error_octet") return s->ErrorOctet();
    if (name == "gateway_address") {
      uint32_t dst = orig_ && orig_->Find("ip") ? orig_->Find("ip")->Get("dst_addr") : 0;
      return s->GatewayFor(dst);
    }
    throw RuntimeError("unknown service " + name);
  }

  int64_t Eval(const Expr& e) {
    switch (e.kind) {
      case Expr::Kind::kConst: return e.value;
      case Expr::Kind::kField: return Read(e.name);
      case Expr::Kind::kService: return Service(e.name);
      case Expr::Kind::kCompare: {
        int64_t a = Eval(e.args[0]), b = Eval(e.args[1]);
        if (e.name == "==") return a == b;
        if (e.name == "!=") return a != b;
        if (e.name == ">=") return a >= b;
        if (e.name == "<=") return a <= b;
        if (e.name == ">") return a > b;
        if (e.name == "<") return a < b;
        throw RuntimeError("unknown comparison " + e.name);
      }
      case Expr::Kind::kAnd:
        for (const auto& a : e.args)
          if (!Eval(a)) return 0;
        return 1;
      case Expr::Kind::kOr:
        for (const auto& a : e.args)
          if (Eval(a)) return 1;
        return 0;
      case Expr::Kind::kNot: return !Eval(e.args[0]);
    }
    return 0;
  }

  void Exec(const Instruction& in, const char* phase) {
    if (opt_.trace) opt_.trace->push_back(std::string(phase) + ": " + ToString(in));
    switch (in.kind) {
      case Instruction::Kind::kSetField:
        Write(in.dst, Eval(in.value));
        return;
      case Instruction::Kind::kCopyField: {
        Ref d = Resolve(in.dst, true);
        if (d.payload) {
          out_.payload = ReadBytes(in.src);
        } else {
          Write(in.dst, Read(in.src));
        }
        return;
      }
      case Instruction::Kind::kSwapFields: {
        int64_t a = Read(in.dst), b = Read(in.src);
        Write(in.dst, b);
        Write(in.src, a);
        return;
      }
      case Instruction::Kind::kComputeChecksum: {
        std::vector<uint8_t> bytes = out_.Serialize();
        ByteSpan s = ResolveRange(out_, in.range);
        Write(in.dst, OnesComplementChecksum(
                          std::span(bytes).subspan(s.begin, s.end - s.begin)));
        return;
      }
      case Instruction::Kind::kIf:
        if (Eval(in.value)) Run(in.then, phase);
        return;
      case Instruction::Kind::kCall:
        if (opt_.state) (*opt_.state)["call:" + in.fn] += 1;
        return;
      case Instruction::Kind::kComment:
        return;
    }
  }

  Packet& out_;
  const Packet* orig_;
  const ExecOptions& opt_;
};

bool HasMessageHeader(const Packet& p, const HeaderLayout& layout) {
  for (const auto& h : p.headers)
    if (h.name() != "ip" && h.layout().fields == layout.fields) return true;
  return false;
}

}  // namespace

Packet Execute(const PacketProgram& program, const std::string& unit_name,
               const std::optional<Packet>& input, const ExecOptions& options) {
  auto it = program.units.find(unit_name);
  if (it == program.units.end()) throw RuntimeError("no unit " + unit_name);
  const FunctionUnit& unit = it->second;
  if (unit.role == "receiver" && !input)
    throw RuntimeError("receiver unit " + unit_name + " needs an input packet");
  const HeaderLayout* layout =
      unit.layout >= 0 ? &program.layouts.at(static_cast<size_t>(unit.layout)) : nullptr;
  Packet out;
  if (input && (!layout || HasMessageHeader(*input, *layout))) {
    out = *input;
  } else if (layout) {
    out = NewPacket(*layout, options.services);
  }
  for (const auto& [path, value] : options.presets) {
    size_t dot = path.find('.');
    HeaderInstance* h = dot == std::string::npos ? nullptr : out.Find(path.substr(0, dot));
    if (!h) throw RuntimeError("unresolved preset " + path);
    h->Set(path.substr(dot + 1), value);
  }
  if (options.payload) out.payload = *options.payload;
  Interpreter interp(out, input ? &*input : nullptr, options);
  interp.Run(unit.advice_before, "advice");
  interp.Run(unit.body, "body");
  FinalizeIpv4(out);
  return out;
}

// ---------------------------------------------------------------------------
// Output formats

namespace {

void Put16(std::ostream& out, uint16_t v) {
  char b[2] = {static_cast<char>(v & 0xFF), static_cast<char>(v >> 8)};
  out.write(b, 2);
}

void Put32(std::ostream& out, uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(b, 4);
}

}  // namespace

void WritePcap(std::ostream& out, const std::vector<std::vector<uint8_t>>& packets) {
  // Little-endian classic pcap; LINKTYPE_RAW (101) carries bare IPv4.
  Put32(out, 0xa1b2c3d4);
  Put16(out, 2);
  Put16(out, 4);
  Put32(out, 0);
  Put32(out, 0);
  Put32(out, 65535);
  Put32(out, 101);
  uint32_t ts = 0;
  for (const auto& p : packets) {
    Put32(out, ts++);
    Put32(out, 0);
    Put32(out, static_cast<uint32_t>(p.size()));
    Put32(out, static_cast<uint32_t>(p.size()));
    out.write(reinterpret_cast<const char*>(p.data()), static_cast<std::streamsize>(p.size()));
  }
}

void WritePcap(const std::string& path, const std::vector<std::vector<uint8_t>>& packets) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw RuntimeError("cannot write " + path);
  WritePcap(out, packets);
  if (!out) throw RuntimeError("write failed for " + path);
}

std::string HexDump(std::span<const uint8_t> bytes) {
  std::string out;
  char buf[16];
  for (size_t off = 0; off < bytes.size(); off += 16) {
    std::snprintf(buf, sizeof buf, "%08zx ", off);
    out += buf;
    std::string ascii;
    for (size_t i = 0; i < 16; ++i) {
      if (i == 8) out += ' ';
      if (off + i < bytes.size()) {
        uint8_t b = bytes[off + i];
        std::snprintf(buf, sizeof buf, " %02x", b);
        out += buf;
        ascii += std::isprint(b) ? static_cast<char>(b) : '.';
      } else {
        out += "   ";
      }
    }
    out += "  |" + ascii + "|\n";
  }
  return out;
}

}  // namespace rfcc
