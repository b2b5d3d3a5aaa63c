#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "wgl/construction.hpp"
#include "wgl/format.hpp"
#include "wgl/probe.hpp"
#include "wgl/svg.hpp"

namespace py = pybind11;
using namespace wgl;

namespace {

py::object parse_error_type;
py::object evaluation_error_type;

[[noreturn]] void raise(const py::object& type, const std::string& message, const py::dict& attrs) {
  py::object err = type(message);
  for (auto item : attrs) py::setattr(err, item.first, item.second);
  PyErr_SetObject(type.ptr(), err.ptr());
  throw py::error_already_set();
}

Construction parse(const std::string& text) {
  auto c = format::parse(text);
  if (!c) {
    const auto& e = c.error();
    py::dict attrs;
    attrs["line"] = e.line;
    attrs["column"] = e.column;
    attrs["kind"] = std::string(format::to_string(e.kind));
    raise(parse_error_type,
          "line " + std::to_string(e.line) + ", column " + std::to_string(e.column) + ": " + e.message, attrs);
  }
  return std::move(*c);
}

Overrides to_overrides(const std::map<std::string, std::pair<double, double>>& in) {
  Overrides out;
  for (const auto& [k, v] : in) out[ObjectId::from(k)] = {v.first, v.second};
  return out;
}

Figure eval_or_raise(const Construction& c, const std::map<std::string, std::pair<double, double>>& moves) {
  auto f = evaluate(c, to_overrides(moves));
  if (!f) {
    py::dict attrs;
    attrs["step"] = f.error().failing_step.str();
    attrs["kind"] = std::string(geom::to_string(f.error().kind));
    raise(evaluation_error_type, f.error().message, attrs);
  }
  return std::move(*f);
}

py::dict figure_dict(const Figure& f) {
  py::dict out;
  for (const auto& [id, obj] : f.objects) {
    out[py::str(id.str())] = std::visit([](const auto& o) { return py::cast(o); }, obj);
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Geometry kernel, construction format and soundness probe";

  py::object base = py::module_::import("builtins").attr("ValueError");
  parse_error_type = py::reinterpret_borrow<py::object>(PyErr_NewException("wgl._core.ParseError", base.ptr(), nullptr));
  evaluation_error_type =
      py::reinterpret_borrow<py::object>(PyErr_NewException("wgl._core.EvaluationError", base.ptr(), nullptr));
  m.attr("ParseError") = parse_error_type;
  m.attr("EvaluationError") = evaluation_error_type;

  py::class_<geom::Point>(m, "Point")
      .def(py::init<double, double>(), py::arg("x"), py::arg("y"))
      .def_readonly("x", &geom::Point::x)
      .def_readonly("y", &geom::Point::y)
      .def("__repr__", [](const geom::Point& p) {
        return "Point(" + format::format_number(p.x) + ", " + format::format_number(p.y) + ")";
      });

  // a*x + b*y + c = 0 with a^2 + b^2 = 1
  py::class_<geom::Line>(m, "Line")
      .def_readonly("a", &geom::Line::a)
      .def_readonly("b", &geom::Line::b)
      .def_readonly("c", &geom::Line::c)
      .def("__repr__", [](const geom::Line& l) {
        return "Line(" + format::format_number(l.a) + ", " + format::format_number(l.b) + ", " +
               format::format_number(l.c) + ")";
      });

  py::class_<geom::Circle>(m, "Circle")
      .def_readonly("center", &geom::Circle::center)
      .def_readonly("radius", &geom::Circle::radius)
      .def("__repr__", [](const geom::Circle& c) {
        return "Circle(" + format::format_number(c.center.x) + ", " + format::format_number(c.center.y) + ", " +
               format::format_number(c.radius) + ")";
      });

  py::class_<Construction>(m, "Construction")
      .def(py::init<>())
      .def("__len__", &Construction::size)
      .def("__eq__", [](const Construction& a, const Construction& b) { return a == b; })
      .def("__str__", [](const Construction& c) { return format::serialize(c); })
      .def_property_readonly("ids",
                             [](const Construction& c) {
                               std::vector<std::string> out;
                               for (const auto& s : c.steps()) out.push_back(s.id.str());
                               return out;
                             })
      .def(
          "add",
          [](Construction& c, const std::string& line) {
            auto s = format::parse_step(line);
            if (!s) {
              py::dict attrs;
              attrs["line"] = s.error().line;
              attrs["column"] = s.error().column;
              attrs["kind"] = std::string(format::to_string(s.error().kind));
              raise(parse_error_type, s.error().message, attrs);
            }
            if (auto r = c.add(*s); !r) throw py::value_error(r.error().message);
          },
          py::arg("step"), "Appends one step given in file syntax, e.g. \"mid M A B\".")
      .def(
          "remove",
          [](Construction& c, const std::string& id) {
            auto oid = ObjectId::make(id);
            if (!oid) throw py::value_error("malformed id");
            if (auto r = c.remove(*oid); !r) throw py::value_error(r.error().message);
          },
          py::arg("id"))
      .def(
          "move_free",
          [](const Construction& c, const std::string& id, double x, double y) {
            auto oid = ObjectId::make(id);
            if (!oid) throw py::value_error("malformed id");
            auto moved = wgl::move_free(c, *oid, x, y);
            if (!moved) throw py::value_error(moved.error().message);
            return std::move(*moved);
          },
          py::arg("id"), py::arg("x"), py::arg("y"), "Copy with a free point moved.")
      .def(
          "evaluate",
          [](const Construction& c, const std::map<std::string, std::pair<double, double>>& moves) {
            return figure_dict(eval_or_raise(c, moves));
          },
          py::arg("moves") = std::map<std::string, std::pair<double, double>>{},
          "Dict of id -> Point/Line/Circle. `moves` overrides free points.");

  m.def("parse", &parse, py::arg("text"));
  m.def("serialize", [](const Construction& c) { return format::serialize(c); }, py::arg("construction"));
  m.def(
      "validate",
      [](const Construction& c) {
        py::list out;
        for (const auto& n : format::validate(c)) {
          out.append(py::make_tuple(std::string(format::to_string(n.kind)), n.id.str(), n.message));
        }
        return out;
      },
      py::arg("construction"), "Static notes as (kind, id, message) tuples.");
  m.def(
      "probe_json",
      [](const Construction& c, std::uint64_t samples, std::uint64_t seed) {
        probe::ProbeConfig cfg;
        cfg.samples = samples;
        cfg.seed = seed;
        std::string out;
        {
          py::gil_scoped_release release;
          out = probe::to_json(probe::probe(c, cfg), cfg, c);
        }
        return out;
      },
      py::arg("construction"), py::arg("samples") = 1000, py::arg("seed") = 0);
  m.def(
      "render_svg",
      [](const Construction& c, const std::map<std::string, std::pair<double, double>>& moves) {
        return svg::render(c, eval_or_raise(c, moves));
      },
      py::arg("construction"), py::arg("moves") = std::map<std::string, std::pair<double, double>>{});
}
