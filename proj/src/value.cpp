#include "relsynth/value.hpp"

#include <sstream>

namespace relsynth {

std::string to_string(FieldType t) { return t == FieldType::Int ? "int" : "text"; }

SchemaRef make_schema(Schema s) { return std::make_shared<const Schema>(std::move(s)); }

SchemaRef qualify(const Schema& s, const std::string& qualifier) {
  Schema out = s;
  for (auto& c : out) c.qualifier = qualifier;
  return make_schema(std::move(out));
}

bool same_types(const Schema& a, const Schema& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i].type != b[i].type) return false;
  return true;
}

std::string to_string(const Schema& s) {
  std::string out = "(";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ", ";
    out += s[i].qualified_name() + ":" + to_string(s[i].type);
  }
  return out + ")";
}

FieldType type_of(const Scalar& s) {
  return std::holds_alternative<std::int64_t>(s) ? FieldType::Int : FieldType::Text;
}

std::string to_string(const Scalar& s) {
  if (auto* i = std::get_if<std::int64_t>(&s)) return std::to_string(*i);
  return "\"" + std::get<std::string>(s) + "\"";
}

namespace {

std::string row_string(const Row& r) {
  std::string out = "[";
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (i) out += ",";
    out += to_string(r[i]);
  }
  return out + "]";
}

}  // namespace

std::string to_string(const Value& v) {
  struct Visitor {
    std::string operator()(std::int64_t i) const { return std::to_string(i); }
    std::string operator()(const std::string& s) const { return "\"" + s + "\""; }
    std::string operator()(const Record& r) const { return "{" + row_string(r.fields) + "}"; }
    std::string operator()(const Relation& r) const {
      std::string out = "[";
      for (std::size_t i = 0; i < r.rows.size(); ++i) {
        if (i) out += ",";
        out += row_string(r.rows[i]);
      }
      return out + "]";
    }
    std::string operator()(const OptInt& o) const { return o ? std::to_string(*o) : "absent"; }
  };
  return std::visit(Visitor{}, v);
}

std::ostream& operator<<(std::ostream& os, const Value& v) { return os << to_string(v); }

bool conforms(const Row& row, const Schema& schema) {
  if (row.size() != schema.size()) return false;
  for (std::size_t i = 0; i < row.size(); ++i)
    if (type_of(row[i]) != schema[i].type) return false;
  return true;
}

}  // namespace relsynth
