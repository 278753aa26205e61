#pragma once

#include <iosfwd>
#include <map>
#include <string>

#include "rnnt/toy_model.hpp"

namespace rnnt {

// Binary model checkpoint, all integers little-endian:
//
//   magic        8 bytes  "RNNTCKPT"
//   version      u32      1
//   header_len   u32      byte length of the header text
//   header       text     "key=value\n" lines: the ModelConfig fields followed
//                         by free-form metadata, keys sorted
//   n_tensors    u32
//   per tensor:  u32 name_len, name bytes, u32 rows, u32 cols,
//                rows * cols IEEE-754 float64 values in row-major order
//
// Tensors appear in Parameters::tensors() order. Saving then loading is a
// bit-exact round trip.
struct Checkpoint {
  ModelConfig config;
  std::map<std::string, std::string> metadata;
  Parameters params;
};

void write_checkpoint(std::ostream& os, const Checkpoint& ckpt);
Checkpoint read_checkpoint(std::istream& is);

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace rnnt
