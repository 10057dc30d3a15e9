#include "relsynth/interp.hpp"

namespace relsynth::interp {

using nlohmann::json;

namespace {

FieldType parse_type(const json& t) {
  if (t == "int") return FieldType::Int;
  if (t == "text") return FieldType::Text;
  throw InputError("unknown field type " + t.dump());
}

Scalar scalar_from_json(const json& v, FieldType type) {
  if (type == FieldType::Int) {
    if (!v.is_number_integer()) throw InputError("expected integer, got " + v.dump());
    return v.get<std::int64_t>();
  }
  if (!v.is_string()) throw InputError("expected string, got " + v.dump());
  return v.get<std::string>();
}

json scalar_to_json(const Scalar& s) {
  if (const auto* i = std::get_if<std::int64_t>(&s)) return *i;
  return std::get<std::string>(s);
}

}  // namespace

Relation relation_from_json(const json& doc) {
  if (!doc.is_object() || !doc.contains("schema") || !doc.contains("rows"))
    throw InputError("relation must be an object with \"schema\" and \"rows\"");
  Schema schema;
  for (const auto& f : doc.at("schema")) {
    if (!f.is_array() || f.size() != 2 || !f[0].is_string())
      throw InputError("schema entries must be [name, type] pairs");
    schema.push_back(Column{"", f[0].get<std::string>(), parse_type(f[1])});
  }
  Relation rel{make_schema(schema), {}};
  for (const auto& r : doc.at("rows")) {
    if (!r.is_array() || r.size() != schema.size())
      throw InputError("row " + r.dump() + " does not match schema arity");
    Row row;
    for (std::size_t c = 0; c < schema.size(); ++c) row.push_back(scalar_from_json(r[c], schema[c].type));
    rel.rows.push_back(std::move(row));
  }
  return rel;
}

json relation_to_json(const Relation& r) {
  json schema = json::array();
  if (r.schema)
    for (const auto& c : *r.schema) schema.push_back({c.qualified_name(), to_string(c.type)});
  json rows = json::array();
  for (const auto& row : r.rows) {
    json jr = json::array();
    for (const auto& s : row) jr.push_back(scalar_to_json(s));
    rows.push_back(std::move(jr));
  }
  return {{"schema", std::move(schema)}, {"rows", std::move(rows)}};
}

json value_to_json(const Value& v) {
  struct Visitor {
    json operator()(std::int64_t i) const { return i; }
    json operator()(const std::string& s) const { return s; }
    json operator()(const Record& r) const {
      json out = json::object();
      for (std::size_t c = 0; c < r.fields.size(); ++c) {
        std::string name = r.schema ? (*r.schema)[c].qualified_name() : std::to_string(c);
        out[name] = scalar_to_json(r.fields[c]);
      }
      return out;
    }
    json operator()(const Relation& r) const { return relation_to_json(r); }
    json operator()(const OptInt& o) const { return o ? json(*o) : json(nullptr); }
  };
  return std::visit(Visitor{}, v);
}

Inputs read_bindings(const json& doc, const TypedProgram& prog) {
  if (!doc.is_object()) throw InputError("bindings must be a JSON object");
  Inputs out;
  for (int p = 0; p < prog.param_count; ++p) {
    const auto& info = prog.slots[static_cast<std::size_t>(p)];
    if (!doc.contains(info.name)) throw InputError("missing binding for parameter '" + info.name + "'");
    const json& v = doc.at(info.name);
    switch (info.type) {
      case frontend::TypeKind::Relation: {
        Relation r = relation_from_json(v);
        if (!same_types(*r.schema, *info.schema))
          throw InputError("schema of '" + info.name + "' does not match " + to_string(*info.schema));
        for (std::size_t c = 0; c < r.schema->size(); ++c)
          if ((*r.schema)[c].name != (*info.schema)[c].name)
            throw InputError("schema of '" + info.name + "' does not match " +
                             to_string(*info.schema));
        r.schema = info.schema;
        out.emplace(info.name, std::move(r));
        break;
      }
      case frontend::TypeKind::Int:
        out.emplace(info.name, std::get<std::int64_t>(scalar_from_json(v, FieldType::Int)));
        break;
      default:
        out.emplace(info.name, std::get<std::string>(scalar_from_json(v, FieldType::Text)));
        break;
    }
  }
  for (const auto& [key, _] : doc.items()) {
    int slot = prog.slot_of(key);
    if (slot < 0 || slot >= prog.param_count) throw InputError("unknown parameter '" + key + "'");
  }
  return out;
}

json write_bindings(const TypedProgram& prog, const Inputs& inputs) {
  json out = json::object();
  for (int p = 0; p < prog.param_count; ++p) {
    const auto& name = prog.slots[static_cast<std::size_t>(p)].name;
    auto it = inputs.find(name);
    if (it != inputs.end()) out[name] = value_to_json(it->second);
  }
  return out;
}

}  // namespace relsynth::interp
