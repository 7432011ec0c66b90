#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace uavsim {

// Splits [0, n) into contiguous chunks and runs them on `workers` threads.
// Results written by index are identical for any worker count.
void parallel_for(std::size_t n, int workers,
                  const std::function<void(std::size_t)>& body);

std::string sha256_hex(const void* data, std::size_t len);
std::string sha256_file_hex(const std::string& path);

void write_file(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

// Fixed-format float for byte-deterministic CSV/log output.
std::string format_double(double v);

}  // namespace uavsim
