// Header materialization, bit-exact field access, one's-complement
// checksums, IR interpretation and pcap output.
#ifndef RFCC_PACKET_RUNTIME_H_
#define RFCC_PACKET_RUNTIME_H_

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rfcc/header_layout.h"
#include "rfcc/ir.h"

namespace rfcc {

class RuntimeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Folded one's-complement sum of 16-bit big-endian words; an odd trailing
// octet is padded with zero.
uint16_t OnesComplementSum(std::span<const uint8_t> span);
// Bitwise complement of OnesComplementSum.
uint16_t OnesComplementChecksum(std::span<const uint8_t> span);

class HeaderInstance {
 public:
  HeaderInstance(std::string name, HeaderLayout layout);

  const std::string& name() const { return name_; }
  const HeaderLayout& layout() const { return layout_; }
  std::vector<uint8_t>& bytes() { return bytes_; }
  const std::vector<uint8_t>& bytes() const { return bytes_; }

  bool Has(std::string_view key) const { return layout_.IndexOf(key) >= 0; }
  uint64_t Get(std::string_view key) const;
  // Stores `value` masked to the field width.
  void Set(std::string_view key, uint64_t value);
  int FieldByteOffset(std::string_view key) const;

  bool operator==(const HeaderInstance& o) const {
    return name_ == o.name_ && layout_ == o.layout_ && bytes_ == o.bytes_;
  }

 private:
  int Index(std::string_view key) const;

  std::string name_;
  HeaderLayout layout_;
  std::vector<uint8_t> bytes_;
};

// Bit-level access on a raw buffer, most significant bit first.
uint64_t GetBits(std::span<const uint8_t> buf, int offset_bits, int width_bits);
void SetBits(std::span<uint8_t> buf, int offset_bits, int width_bits, uint64_t value);

struct Packet {
  std::vector<HeaderInstance> headers;
  std::vector<uint8_t> payload;

  std::vector<uint8_t> Serialize() const;
  size_t size() const;
  HeaderInstance* Find(std::string_view name);
  const HeaderInstance* Find(std::string_view name) const;
  // Byte offset of header `name` within the serialized packet.
  size_t HeaderOffset(std::string_view name) const;

  bool operator==(const Packet&) const = default;
};

// Splits `bytes` into headers with the given names and layouts, in order;
// the rest becomes payload.
Packet ParsePacket(std::span<const uint8_t> bytes,
                   const std::vector<std::pair<std::string, HeaderLayout>>& layouts);

struct ByteSpan {
  size_t begin = 0;
  size_t end = 0;
};

ByteSpan ResolveRange(const Packet& packet, const ChecksumRange& range);
// True iff the one's-complement sum over the range is 0xFFFF.
bool VerifyChecksum(const Packet& packet, const ChecksumRange& range);

// Operating-system services used by generated programs.
class ServiceProvider {
 public:
  virtual ~ServiceProvider() = default;
  virtual uint32_t InterfaceAddress() const = 0;
  // Milliseconds since midnight UT.
  virtual uint32_t MillisSinceMidnightUt() const = 0;
  // Gateway to use for `destination`, or 0 when unknown.
  virtual uint32_t GatewayFor(uint32_t destination) const = 0;
  // Octet offset of the parameter problem in the received datagram.
  virtual uint32_t ErrorOctet() const = 0;
};

// Deterministic provider: the clock advances by `tick_ms` on every read.
class FixedServices : public ServiceProvider {
 public:
  FixedServices(uint32_t interface_address = 0x0A000101, uint32_t start_ms = 3600000,
                uint32_t tick_ms = 1);

  uint32_t InterfaceAddress() const override { return address_; }
  uint32_t MillisSinceMidnightUt() const override;
  uint32_t GatewayFor(uint32_t destination) const override;
  uint32_t ErrorOctet() const override { return error_octet_; }

  void set_gateway(uint32_t g) { gateway_ = g; }
  void set_error_octet(uint32_t o) { error_octet_ = o; }

 private:
  uint32_t address_;
  mutable uint32_t now_ms_;
  uint32_t tick_ms_;
  uint32_t gateway_ = 0;
  uint32_t error_octet_ = 0;
};

struct ExecOptions {
  const ServiceProvider* services = nullptr;
  // State variables read and written by state-management programs.
  std::map<std::string, int64_t>* state = nullptr;
  // Receives one line per executed instruction when set.
  std::vector<std::string>* trace = nullptr;
  // Values supplied by the application ("icmp.identifier", "ip.dst_addr"),
  // written to the packet before the unit runs.
  std::vector<std::pair<std::string, uint64_t>> presets;
  std::optional<std::vector<uint8_t>> payload;
};

// Header instance name for a protocol layer ("ICMP" -> "icmp").
std::string LayerName(std::string_view protocol);

// Interprets advice_before then body of `unit`. A receiver unit needs
// `input`. When `input` carries a header with the unit's layout the reply is
// formed in place from a copy of it; otherwise a fresh IP + message packet
// is built and `input` is reachable through "orig." paths.
Packet Execute(const PacketProgram& program, const std::string& unit,
               const std::optional<Packet>& input, const ExecOptions& options);

// Fresh packet: IPv4 header plus one header of `layout` named after its
// protocol.
Packet NewPacket(const HeaderLayout& layout, const ServiceProvider* services);
// Recomputes IPv4 total length and header checksum.
void FinalizeIpv4(Packet& packet);

void WritePcap(std::ostream& out, const std::vector<std::vector<uint8_t>>& packets);
void WritePcap(const std::string& path, const std::vector<std::vector<uint8_t>>& packets);

// Offset, hex bytes and printable ASCII, 16 bytes per line.
std::string HexDump(std::span<const uint8_t> bytes);

}  // namespace rfcc

#endif  // RFCC_PACKET_RUNTIME_H_
