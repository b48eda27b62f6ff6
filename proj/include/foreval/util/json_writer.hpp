#ifndef FOREVAL_UTIL_JSON_WRITER_HPP
#define FOREVAL_UTIL_JSON_WRITER_HPP

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>

namespace foreval {

// Minimal JSON emitter used for every file this tool writes. Numbers are
// printed with %.17g so that doubles round-trip exactly; NaN (the in-memory
// missing-value marker) is emitted as null.
class JsonWriter {
 public:
  std::string take() { return std::move(out_); }
  const std::string& str() const { return out_; }

  JsonWriter& begin_object() {
    separate();
    out_ += '{';
    push(true);
    return *this;
  }

  JsonWriter& end_object() {
    out_ += '}';
    pop();
    return *this;
  }

  JsonWriter& begin_array() {
    separate();
    out_ += '[';
    push(false);
    return *this;
  }

  JsonWriter& end_array() {
    out_ += ']';
    pop();
    return *this;
  }

  JsonWriter& key(std::string_view k) {
    separate();
    append_string(k);
    out_ += ':';
    pending_value_ = true;
    return *this;
  }

  JsonWriter& value(std::string_view s) {
    separate();
    append_string(s);
    return *this;
  }

  JsonWriter& value(const char* s) { return value(std::string_view(s)); }

  JsonWriter& value(double v) {
    separate();
    if (std::isnan(v)) {
      out_ += "null";
    } else {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.17g", v);
      out_ += buf;
    }
    return *this;
  }

  JsonWriter& value(std::int64_t v) {
    separate();
    out_ += std::to_string(v);
    return *this;
  }

  JsonWriter& value(int v) { return value(static_cast<std::int64_t>(v)); }
  JsonWriter& value(std::size_t v) { return value(static_cast<std::int64_t>(v)); }

  JsonWriter& value(bool v) {
    separate();
    out_ += v ? "true" : "false";
    return *this;
  }

  JsonWriter& null() {
    separate();
    out_ += "null";
    return *this;
  }

  // Emits pre-rendered JSON (e.g. a number kept in its original text form).
  JsonWriter& raw(std::string_view text) {
    separate();
    out_ += text;
    return *this;
  }

  static std::string number(double v) {
    if (std::isnan(v)) return "null";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
  }

 private:
  void push(bool is_object) {
    depth_ <<= 1;
    depth_ |= is_object ? 1u : 0u;
    first_ = true;
    pending_value_ = false;
  }

  void pop() {
    depth_ >>= 1;
    first_ = false;
    pending_value_ = false;
  }

  // Insert a comma between siblings; a value right after key() never takes one.
  void separate() {
    if (pending_value_) {
      pending_value_ = false;
      return;
    }
    if (!first_) out_ += ',';
    first_ = false;
  }

  void append_string(std::string_view s) {
    out_ += '"';
    for (char c : s) {
      switch (c) {
        case '"': out_ += "\\\""; break;
        case '\\': out_ += "\\\\"; break;
        case '\n': out_ += "\\n"; break;
        case '\r': out_ += "\\r"; break;
        case '\t': out_ += "\\t"; break;
        default:
          if (static_cast<unsigned char>(c) < 0x20) {
            char buf[8];
            std::snprintf(buf, sizeof(buf), "\\u%04x", c);
            out_ += buf;
          } else {
            out_ += c;
          }
      }
    }
    out_ += '"';
  }

  std::string out_;
  std::uint64_t depth_ = 0;
  bool first_ = true;
  bool pending_value_ = false;
};

}  // namespace foreval

#endif  // FOREVAL_UTIL_JSON_WRITER_HPP
