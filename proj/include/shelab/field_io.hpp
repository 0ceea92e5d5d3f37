#pragma once

#include "shelab/field.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>

namespace shelab {

/// Binary field snapshot ("SHEFLD01", little-endian); layout in docs/field_format.md.
struct FieldRecord {
    Field field;
    std::uint64_t replicate_id = 0;
};

void write_field(std::ostream& os, const Field& f, std::uint64_t replicate_id = 0);
FieldRecord read_field_record(std::istream& is);
Field read_field(std::istream& is);

void save_field(const std::string& path, const Field& f, std::uint64_t replicate_id = 0);
FieldRecord load_field_record(const std::string& path);
Field load_field(const std::string& path);

} // namespace shelab
