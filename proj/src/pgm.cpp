#include "biprism/pgm.hpp"

#include <cstdio>
#include <fstream>

#include "biprism/errors.hpp"

namespace biprism {

void write_pgm(const std::string& path, const std::vector<uint16_t>& pixels, int rows,
               int cols, uint16_t maxval) {
  if (rows <= 0 || cols <= 0 || pixels.size() != static_cast<size_t>(rows) * cols)
    throw ParameterError("pgm: pixel buffer does not match rows*cols");
  if (maxval == 0) maxval = 1;

  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path + " for writing");
  char header[64];
  std::snprintf(header, sizeof header, "P5\n%d %d\n%u\n", cols, rows,
                static_cast<unsigned>(maxval));
  os << header;

  if (maxval > 255) {
    std::vector<unsigned char> row(static_cast<size_t>(cols) * 2);
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) {
        const uint16_t v = pixels[static_cast<size_t>(r) * cols + c];
        row[static_cast<size_t>(c) * 2] = static_cast<unsigned char>(v >> 8);
        row[static_cast<size_t>(c) * 2 + 1] = static_cast<unsigned char>(v & 0xff);
      }
      os.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
    }
  } else {
    std::vector<unsigned char> row(static_cast<size_t>(cols));
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c)
        row[static_cast<size_t>(c)] =
            static_cast<unsigned char>(pixels[static_cast<size_t>(r) * cols + c]);
      os.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
    }
  }
  if (!os) throw IoError("write failed: " + path);
}

}  // namespace biprism
