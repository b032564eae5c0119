#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <system_error>

#include "odc/errors.hpp"

namespace odc {

struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// 17 significant digits, '.' separator, locale-free; enough to round-trip
// any double and byte-stable across runs
inline std::string format_full(double v) {
    char buf[64];
    const auto res =
        std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    if (res.ec != std::errc{}) throw io_error("format_full: conversion failed");
    return std::string(buf, res.ptr);
}

// compact fixed-precision form for plot coordinates and labels
inline std::string format_compact(double v, int precision = 6) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v,
                                   std::chars_format::general, precision);
    if (res.ec != std::errc{}) throw io_error("format_compact: conversion failed");
    return std::string(buf, res.ptr);
}

// CSV accumulator: header row first, LF endings, numbers at full precision
class CsvBuilder {
  public:
    explicit CsvBuilder(std::initializer_list<std::string> header) {
        bool first = true;
        for (const auto& h : header) {
            if (!first) out_ += ',';
            out_ += h;
            first = false;
        }
        out_ += '\n';
        columns_ = header.size();
    }

    class Row {
      public:
        explicit Row(CsvBuilder& b) : b_(b) {}
        Row& cell(double v) { return raw(format_full(v)); }
        Row& cell(std::int64_t v) { return raw(std::to_string(v)); }
        Row& cell(int v) { return raw(std::to_string(v)); }
        Row& cell(std::size_t v) { return raw(std::to_string(v)); }
        Row& cell(const std::string& s) { return raw(s); }
        ~Row() {
            b_.out_ += '\n';
            if (cells_ != b_.columns_)
                b_.ragged_ = true;
        }
        Row(const Row&) = delete;
        Row& operator=(const Row&) = delete;

      private:
        Row& raw(const std::string& s) {
            if (cells_ > 0) b_.out_ += ',';
            b_.out_ += s;
            ++cells_;
            return *this;
        }
        CsvBuilder& b_;
        std::size_t cells_ = 0;
    };

    Row row() { return Row(*this); }

    const std::string& str() const {
        if (ragged_)
            throw io_error("csv: row width does not match the header");
        return out_;
    }

  private:
    friend class Row;
    std::string out_;
    std::size_t columns_ = 0;
    bool ragged_ = false;
};

// binary-mode write so line endings stay LF everywhere
inline void write_text_file(const std::filesystem::path& path,
                            const std::string& content) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
        if (ec)
            throw io_error("cannot create directory " +
                           path.parent_path().string() + ": " + ec.message());
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw io_error("cannot open " + path.string() + " for writing");
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!f) throw io_error("write failed for " + path.string());
}

inline std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw io_error("cannot open " + path.string());
    std::string content((std::istreambuf_iterator<char>(f)),
                        std::istreambuf_iterator<char>());
    if (f.bad()) throw io_error("read failed for " + path.string());
    return content;
}

}  // namespace odc
