#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "pvkit/bytes.hpp"

namespace pvkit {

// Canonical binary encoding used everywhere bytes must be reproducible:
// token bodies, certificates, wire messages, encrypted payload plaintexts
// and the smart-card file. Integers are big-endian; variable-length fields
// carry a 4-byte big-endian length prefix.

class ByteWriter {
public:
    void put_u8(std::uint8_t v) { buf_.push_back(v); }

    void put_u32(std::uint32_t v) {
        buf_.push_back(static_cast<std::uint8_t>(v >> 24));
        buf_.push_back(static_cast<std::uint8_t>(v >> 16));
        buf_.push_back(static_cast<std::uint8_t>(v >> 8));
        buf_.push_back(static_cast<std::uint8_t>(v));
    }

    void put_u64(std::uint64_t v) {
        put_u32(static_cast<std::uint32_t>(v >> 32));
        put_u32(static_cast<std::uint32_t>(v));
    }

    // 4-byte length prefix, then the raw bytes.
    void put_field(BytesView data) {
        put_u32(static_cast<std::uint32_t>(data.size()));
        buf_.insert(buf_.end(), data.begin(), data.end());
    }

    void put_field(std::string_view s) {
        put_u32(static_cast<std::uint32_t>(s.size()));
        buf_.insert(buf_.end(), s.begin(), s.end());
    }

    void put_raw(BytesView data) { buf_.insert(buf_.end(), data.begin(), data.end()); }

    const Bytes& bytes() const { return buf_; }
    Bytes take() { return std::move(buf_); }

private:
    Bytes buf_;
};

// Bounds-checked reader. Every read_* returns false once the input is
// exhausted or a declared length overruns the buffer; the reader then
// stays in the failed state.
class ByteReader {
public:
    explicit ByteReader(BytesView data) : data_(data) {}

    bool read_u8(std::uint8_t& out) {
        if (failed_ || pos_ + 1 > data_.size()) return fail();
        out = data_[pos_++];
        return true;
    }

    bool read_u32(std::uint32_t& out) {
        if (failed_ || pos_ + 4 > data_.size()) return fail();
        out = (static_cast<std::uint32_t>(data_[pos_]) << 24) |
              (static_cast<std::uint32_t>(data_[pos_ + 1]) << 16) |
              (static_cast<std::uint32_t>(data_[pos_ + 2]) << 8) |
              static_cast<std::uint32_t>(data_[pos_ + 3]);
        pos_ += 4;
        return true;
    }

    bool read_u64(std::uint64_t& out) {
        std::uint32_t hi = 0;
        std::uint32_t lo = 0;
        if (!read_u32(hi) || !read_u32(lo)) return false;
        out = (static_cast<std::uint64_t>(hi) << 32) | lo;
        return true;
    }

    bool read_field(Bytes& out) {
        std::uint32_t len = 0;
        if (!read_u32(len)) return false;
        if (pos_ + len > data_.size()) return fail();
        out.assign(data_.begin() + static_cast<std::ptrdiff_t>(pos_),
                   data_.begin() + static_cast<std::ptrdiff_t>(pos_ + len));
        pos_ += len;
        return true;
    }

    bool read_field(std::string& out) {
        Bytes tmp;
        if (!read_field(tmp)) return false;
        out.assign(tmp.begin(), tmp.end());
        return true;
    }

    bool at_end() const { return !failed_ && pos_ == data_.size(); }
    bool failed() const { return failed_; }
    std::size_t remaining() const { return failed_ ? 0 : data_.size() - pos_; }

private:
    bool fail() {
        failed_ = true;
        return false;
    }

    BytesView data_;
    std::size_t pos_ = 0;
    bool failed_ = false;
};

inline Bytes u64_be(std::uint64_t v) {
    ByteWriter w;
    w.put_u64(v);
    return w.take();
}

} // namespace pvkit
