#include "rfcc/header_layout.h"

#include <cctype>

namespace rfcc {

std::string FieldKey(std::string_view name) {
  std::string out;
  bool pending = false;
  for (char c : name) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      if (pending && !out.empty()) out += '_';
      pending = false;
      out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    } else {
      pending = true;
    }
  }
  return out;
}

int HeaderLayout::TotalBits() const {
  int n = 0;
  for (const auto& f : fields) n += f.width_bits;
  return n;
}

int HeaderLayout::IndexOf(std::string_view key) const {
  std::string k = FieldKey(key);
  for (size_t i = 0; i < fields.size(); ++i)
    if (FieldKey(fields[i].name) == k) return static_cast<int>(i);
  return -1;
}

int HeaderLayout::OffsetBits(int index) const {
  int off = 0;
  for (int i = 0; i < index; ++i) off += fields[i].width_bits;
  return off;
}

const HeaderLayout& Ipv4Layout() {
  static const HeaderLayout kLayout = {
      "IP",
      "IPv4 Header",
      {{"version", 4},
       {"ihl", 4},
       {"tos", 8},
       {"total_length", 16},
       {"identification", 16},
       {"flags", 3},
       {"fragment_offset", 13},
       {"ttl", 8},
       {"protocol", 8},
       {"header_checksum", 16},
       {"src_addr", 32},
       {"dst_addr", 32}},
      ""};
  return kLayout;
}

}  // namespace rfcc
