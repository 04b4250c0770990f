#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace biprism {

// Binary PGM (P5). Two bytes per sample, big-endian, when maxval > 255.
void write_pgm(const std::string& path, const std::vector<uint16_t>& pixels, int rows,
               int cols, uint16_t maxval);

}  // namespace biprism
