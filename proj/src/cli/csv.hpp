#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>

#include <fmt/format.h>

#include "batchps/errors.hpp"

namespace batchps::cli {

/// 12 significant digits, scientific.
inline std::string num(double v) { return fmt::format("{:.11e}", v); }

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, std::string_view header) : path_(path), out_(path) {
    if (!out_) throw Error(fmt::format("cannot write {}", path.string()));
    out_ << header << '\n';
  }

  template <typename... Cells>
  void row(const Cells&... cells) {
    bool first = true;
    ((out_ << (first ? "" : ",") << cell(cells), first = false), ...);
    out_ << '\n';
  }

  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  static std::string cell(double v) { return num(v); }
  static std::string cell(std::uint64_t v) { return std::to_string(v); }
  static std::string cell(int v) { return std::to_string(v); }
  static std::string cell(const std::string& v) { return v; }
  static std::string cell(const char* v) { return v; }

  std::filesystem::path path_;
  std::ofstream out_;
};

}  // namespace batchps::cli
