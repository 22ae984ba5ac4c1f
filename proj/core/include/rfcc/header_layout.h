// Packet header layouts: ordered fields with bit widths.
#ifndef RFCC_HEADER_LAYOUT_H_
#define RFCC_HEADER_LAYOUT_H_

#include <string>
#include <string_view>
#include <vector>

namespace rfcc {

struct HeaderField {
  std::string name;
  int width_bits = 0;

  bool operator==(const HeaderField&) const = default;
};

struct HeaderLayout {
  std::string protocol;
  std::string message;
  std::vector<HeaderField> fields;
  // Open-ended data described after the fixed fields ("Data ...",
  // "Internet Header + 64 bits of Data Datagram"); carried as payload.
  std::string trailer;

  int TotalBits() const;
  int TotalBytes() const { return (TotalBits() + 7) / 8; }
  // Index of the field whose key matches `key`, or -1.
  int IndexOf(std::string_view key) const;
  // Bit offset of field `index`.
  int OffsetBits(int index) const;

  bool operator==(const HeaderLayout&) const = default;
};

// Field lookup key: lowercase with runs of non-alphanumerics folded to '_'.
// "Sequence Number" -> "sequence_number".
std::string FieldKey(std::string_view name);

// The built-in 20-byte IPv4 header (no options).
const HeaderLayout& Ipv4Layout();

}  // namespace rfcc

#endif  // RFCC_HEADER_LAYOUT_H_
