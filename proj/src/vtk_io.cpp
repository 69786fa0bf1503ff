// Copyright 2026 The Hemoflow Authors.
// SPDX-License-Identifier: Apache-2.0

#include "hemoflow/vtk_io.hpp"

#include "hemoflow/error.hpp"
#include "text_util.hpp"

#include <cmath>
#include <sstream>

namespace hemoflow::vtk {

namespace {

class Tokens {
public:
  Tokens(std::vector<std::string_view> toks, std::string context)
      : toks_(std::move(toks)), ctx_(std::move(context)) {}

  bool done() const { return pos_ >= toks_.size(); }
  std::string_view peek() const { return toks_[pos_]; }
  std::string_view next() {
    if (done())
      fail(ErrorKind::Parse, ctx_ + ": unexpected end of file");
    return toks_[pos_++];
  }
  double number() { return detail::parse_double(next(), ctx_); }
  long long integer() { return detail::parse_int(next(), ctx_); }
  size_t count() {
    const long long v = integer();
    if (v < 0)
      fail(ErrorKind::Parse, ctx_ + ": negative count");
    return static_cast<size_t>(v);
  }
  const std::string& context() const { return ctx_; }

private:
  std::vector<std::string_view> toks_;
  size_t pos_ = 0;
  std::string ctx_;
};

void read_attributes(Tokens& tk, size_t n, std::map<std::string, DataArray>& into) {
  while (!tk.done()) {
    const auto kw = tk.peek();
    if (kw == "SCALARS") {
      tk.next();
      DataArray a;
      const std::string name(tk.next());
      a.type = std::string(tk.next());
      a.components = 1;
      if (!tk.done() && tk.peek() != "LOOKUP_TABLE")
        a.components = static_cast<int>(tk.integer());
      if (!tk.done() && tk.peek() == "LOOKUP_TABLE") {
        tk.next();
        tk.next();
      }
      a.values.resize(n * static_cast<size_t>(a.components));
      for (auto& v : a.values)
        v = tk.number();
      into[name] = std::move(a);
    } else if (kw == "VECTORS") {
      tk.next();
      DataArray a;
      const std::string name(tk.next());
      a.type = std::string(tk.next());
      a.components = 3;
      a.values.resize(3 * n);
      for (auto& v : a.values)
        v = tk.number();
      into[name] = std::move(a);
    } else if (kw == "FIELD") {
      tk.next();
      tk.next(); // field name
      const size_t arrays = tk.count();
      for (size_t i = 0; i < arrays; ++i) {
        DataArray a;
        const std::string name(tk.next());
        a.components = static_cast<int>(tk.integer());
        const size_t tuples = tk.count();
        a.type = std::string(tk.next());
        a.values.resize(tuples * static_cast<size_t>(a.components));
        for (auto& v : a.values)
          v = tk.number();
        into[name] = std::move(a);
      }
    } else {
      return;
    }
  }
}

void write_values(std::ostream& out, const DataArray& a) {
  const bool as_int = a.type == "int";
  const size_t per_line = static_cast<size_t>(a.components > 1 ? a.components : 9);
  for (size_t i = 0; i < a.values.size(); ++i) {
    if (as_int)
      out << static_cast<long long>(std::llround(a.values[i]));
    else
      out << detail::format_double(a.values[i]);
    out << (((i + 1) % per_line == 0 || i + 1 == a.values.size()) ? '\n' : ' ');
  }
}

void write_attributes(std::ostream& out, const std::map<std::string, DataArray>& arrays) {
  for (const auto& [name, a] : arrays) {
    if (a.components == 3 && a.type != "int") {
      out << "VECTORS " << name << ' ' << a.type << '\n';
    } else {
      out << "SCALARS " << name << ' ' << a.type << ' ' << a.components << '\n';
      out << "LOOKUP_TABLE default\n";
    }
    write_values(out, a);
  }
}

} // namespace

Dataset read(const std::filesystem::path& path) {
  const std::string text = detail::read_file(path);
  const std::string ctx = path.string();
  std::istringstream in(text);
  std::string l1, l2, l3;
  std::getline(in, l1);
  std::getline(in, l2);
  std::getline(in, l3);
  if (l1.rfind("# vtk DataFile", 0) != 0)
    fail(ErrorKind::Parse, ctx + ": not a VTK legacy file");
  if (detail::trim(l3) != "ASCII")
    fail(ErrorKind::Parse, ctx + ": only ASCII VTK legacy files are supported");
  Dataset d;
  d.title = std::string(detail::trim(l2));
  const auto body_start = static_cast<size_t>(in.tellg());
  Tokens tk(detail::split_ws(std::string_view(text).substr(body_start)), ctx);

  if (tk.next() != "DATASET" || tk.next() != "UNSTRUCTURED_GRID")
    fail(ErrorKind::Parse, ctx + ": expected DATASET UNSTRUCTURED_GRID");

  while (!tk.done()) {
    const auto kw = tk.next();
    if (kw == "POINTS") {
      const size_t n = tk.count();
      tk.next(); // type
      d.points.resize(n);
      for (auto& p : d.points)
        for (int k = 0; k < 3; ++k)
          p[k] = tk.number();
    } else if (kw == "CELLS") {
      const size_t n = tk.count();
      tk.count();
      d.cells.resize(n);
      for (auto& c : d.cells) {
        const size_t k = tk.count();
        c.resize(k);
        for (auto& v : c)
          v = static_cast<int>(tk.integer());
      }
    } else if (kw == "CELL_TYPES") {
      const size_t n = tk.count();
      d.cell_types.resize(n);
      for (auto& t : d.cell_types)
        t = static_cast<int>(tk.integer());
    } else if (kw == "CELL_DATA") {
      read_attributes(tk, tk.count(), d.cell_data);
    } else if (kw == "POINT_DATA") {
      read_attributes(tk, tk.count(), d.point_data);
    } else if (kw == "FIELD") {
      tk.next();
      const size_t arrays = tk.count();
      for (size_t i = 0; i < arrays; ++i) {
        DataArray a;
        const std::string name(tk.next());
        a.components = static_cast<int>(tk.integer());
        const size_t tuples = tk.count();
        a.type = std::string(tk.next());
        a.values.resize(tuples * static_cast<size_t>(a.components));
        for (auto& v : a.values)
          v = tk.number();
        d.field_data[name] = std::move(a);
      }
    } else {
      fail(ErrorKind::Parse, ctx + ": unsupported section '" + std::string(kw) + "'");
    }
  }
  if (d.cells.size() != d.cell_types.size())
    fail(ErrorKind::Parse, ctx + ": CELLS and CELL_TYPES counts differ");
  for (const auto& c : d.cells)
    for (int v : c)
      if (v < 0 || static_cast<size_t>(v) >= d.points.size())
        fail(ErrorKind::Parse, ctx + ": cell references a missing point");
  return d;
}

void write(const std::filesystem::path& path, const Dataset& d) {
  auto out = detail::open_output(path);
  out << "# vtk DataFile Version 3.0\n" << (d.title.empty() ? "hemoflow" : d.title) << "\nASCII\n";
  out << "DATASET UNSTRUCTURED_GRID\n";
  if (!d.field_data.empty()) {
    out << "FIELD FieldData " << d.field_data.size() << '\n';
    for (const auto& [name, a] : d.field_data) {
      out << name << ' ' << a.components << ' ' << a.values.size() / static_cast<size_t>(a.components) << ' '
          << a.type << '\n';
      write_values(out, a);
    }
  }
  out << "POINTS " << d.points.size() << " double\n";
  for (const auto& p : d.points)
    out << detail::format_double(p.x()) << ' ' << detail::format_double(p.y()) << ' '
        << detail::format_double(p.z()) << '\n';
  size_t size = 0;
  for (const auto& c : d.cells)
    size += c.size() + 1;
  out << "CELLS " << d.cells.size() << ' ' << size << '\n';
  for (const auto& c : d.cells) {
    out << c.size();
    for (int v : c)
      out << ' ' << v;
    out << '\n';
  }
  out << "CELL_TYPES " << d.cell_types.size() << '\n';
  for (int t : d.cell_types)
    out << t << '\n';
  if (!d.cell_data.empty()) {
    out << "CELL_DATA " << d.cells.size() << '\n';
    write_attributes(out, d.cell_data);
  }
  if (!d.point_data.empty()) {
    out << "POINT_DATA " << d.points.size() << '\n';
    write_attributes(out, d.point_data);
  }
  if (!out)
    fail(ErrorKind::Io, "failed writing '" + path.string() + "'");
}

} // namespace hemoflow::vtk
