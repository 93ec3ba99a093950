// Python bindings for the main pipeline, link and simulator operations.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>

#include "neurokey/eeg.hpp"
#include "neurokey/errors.hpp"
#include "neurokey/keys.hpp"
#include "neurokey/link.hpp"
#include "neurokey/sim.hpp"

namespace py = pybind11;
using namespace neurokey;

namespace {

py::bytes key_bytes(const keys::SessionKey& key) {
  return py::bytes(reinterpret_cast<const char*>(key.bytes.data()), key.bytes.size());
}

keys::SessionKey key_from_bytes(const py::bytes& data) {
  std::string s = data;
  if (s.size() != 16) throw ArgumentError("session key must be 16 bytes");
  keys::SessionKey key;
  std::memcpy(key.bytes.data(), s.data(), 16);
  return key;
}

std::vector<uint8_t> to_vec(const py::bytes& data) {
  std::string s = data;
  return {s.begin(), s.end()};
}

py::bytes to_bytes(const std::vector<uint8_t>& v) {
  return py::bytes(reinterpret_cast<const char*>(v.data()), v.size());
}

py::dict event_to_dict(const sim::SimEvent& e) {
  py::dict d;
  d["tick"] = e.tick;
  d["node"] = sim::to_string(e.node);
  d["kind"] = sim::to_string(e.kind);
  d["detail"] = e.detail;
  d["seq"] = e.seq;
  return d;
}

}  // namespace

PYBIND11_MODULE(_neurokey, m) {
  m.doc() = "EEG-derived key generation, secured link codec and mission simulator";
  m.attr("__version__") = "0.1.0";

  // Later registrations are tried first, so the base class goes first.
  py::register_exception<Error>(m, "NeurokeyError");
  py::register_exception<ParseError>(m, "ParseFailure");
  py::register_exception<AuthenticationError>(m, "AuthenticationError");

  py::class_<eeg::EegRecord>(m, "EegRecord")
      .def(py::init<>())
      .def_readwrite("samples", &eeg::EegRecord::samples)
      .def_readwrite("sample_rate_hz", &eeg::EegRecord::sample_rate_hz)
      .def_readwrite("subject_id", &eeg::EegRecord::subject_id)
      .def_readwrite("task_label", &eeg::EegRecord::task_label);

  py::class_<eeg::BetaSignal>(m, "BetaSignal")
      .def_readonly("samples", &eeg::BetaSignal::samples)
      .def_readonly("sample_rate_hz", &eeg::BetaSignal::sample_rate_hz)
      .def_readonly("window_seconds", &eeg::BetaSignal::window_seconds)
      .def_readonly("amplitude_multiplier", &eeg::BetaSignal::amplitude_multiplier);

  m.def("load_record",
        [](const std::string& path) { return eeg::load_record(path); },
        py::arg("path"));
  m.def("save_record",
        [](const eeg::EegRecord& rec, const std::string& path) {
          eeg::save_record(rec, path);
        },
        py::arg("record"), py::arg("path"));
  m.def("synthesize_beta",
        [](uint64_t seed, double duration_s, double sample_rate_hz,
           const std::vector<std::tuple<double, double, double>>& tones,
           double noise_std) {
          std::vector<eeg::Tone> ts;
          for (const auto& [f, a, p] : tones) ts.push_back({f, a, p});
          return eeg::synthesize_beta(seed, duration_s, sample_rate_hz, ts, noise_std);
        },
        py::arg("seed"), py::arg("duration_s"), py::arg("sample_rate_hz"),
        py::arg("tones"), py::arg("noise_std") = 0.0);
  m.def("extract_beta", &eeg::extract_beta, py::arg("record"),
        py::arg("window_seconds"), py::arg("amplitude_multiplier"));

  py::class_<features::LegendreFit>(m, "LegendreFit")
      .def_readonly("coefficients", &features::LegendreFit::coefficients)
      .def_readonly("degree", &features::LegendreFit::degree)
      .def_readonly("residual_rms", &features::LegendreFit::residual_rms);

  m.def("legendre_polynomial", &features::legendre_polynomial, py::arg("n"),
        py::arg("x"));
  m.def("fit_legendre", &features::fit_legendre, py::arg("signal"), py::arg("degree"));

  py::class_<keys::PipelineConfig>(m, "PipelineConfig")
      .def(py::init<>())
      .def_readwrite("degree", &keys::PipelineConfig::degree)
      .def_readwrite("scale_c", &keys::PipelineConfig::scale_c)
      .def_readwrite("theta", &keys::PipelineConfig::theta)
      .def_readwrite("hash_bits", &keys::PipelineConfig::hash_bits)
      .def_readwrite("key_features", &keys::PipelineConfig::key_features)
      .def_readwrite("window_seconds", &keys::PipelineConfig::window_seconds)
      .def_readwrite("amplitude", &keys::PipelineConfig::amplitude)
      .def_readwrite("sigma_scale", &keys::PipelineConfig::sigma_scale)
      .def_readwrite("sigma_floor", &keys::PipelineConfig::sigma_floor)
      .def_property(
          "code",
          [](const keys::PipelineConfig& c) {
            return py::make_tuple(c.code.n, c.code.k, c.code.t);
          },
          [](keys::PipelineConfig& c, py::tuple t) {
            c.code = {t[0].cast<unsigned>(), t[1].cast<unsigned>(),
                      t[2].cast<unsigned>()};
          });

  py::class_<keys::EnrollmentRecord>(m, "EnrollmentRecord")
      .def("save",
           [](const keys::EnrollmentRecord& r, const std::string& path) {
             r.save(path);
           })
      .def_static("load",
                  [](const std::string& path) {
                    return keys::EnrollmentRecord::load(path);
                  })
      .def("to_bytes",
           [](const keys::EnrollmentRecord& r) { return to_bytes(r.to_bytes()); })
      .def_static("from_bytes",
                  [](const py::bytes& data) {
                    auto v = to_vec(data);
                    return keys::EnrollmentRecord::from_bytes(v);
                  })
      .def("fingerprint", &keys::EnrollmentRecord::fingerprint)
      .def_property_readonly("selection_indices",
                             [](const keys::EnrollmentRecord& r) {
                               return r.selection_indices;
                             });

  m.def("enroll",
        [](const eeg::EegRecord& rec, const keys::PipelineConfig& cfg, uint64_t seed) {
          auto e = keys::enroll(rec, cfg, seed);
          return py::make_tuple(key_bytes(e.key), e.record);
        },
        py::arg("record"), py::arg("config") = keys::PipelineConfig{},
        py::arg("seed"));
  m.def("reproduce_key",
        [](const eeg::EegRecord& fresh, const keys::EnrollmentRecord& enr,
           const keys::PipelineConfig& cfg) {
          return key_bytes(keys::reproduce_key(fresh, enr, cfg));
        },
        py::arg("fresh"), py::arg("enrollment"),
        py::arg("config") = keys::PipelineConfig{});
  m.def("rotate_key",
        [](const eeg::EegRecord& fresh, const keys::PipelineConfig& cfg,
           uint64_t new_seed) {
          auto e = keys::rotate_key(fresh, cfg, new_seed);
          return py::make_tuple(key_bytes(e.key), e.record);
        },
        py::arg("fresh"), py::arg("config") = keys::PipelineConfig{},
        py::arg("new_seed"));

  py::enum_<link::FrameType>(m, "FrameType")
      .value("Command", link::FrameType::Command)
      .value("Telemetry", link::FrameType::Telemetry)
      .value("KeyChangeRequest", link::FrameType::KeyChangeRequest)
      .value("KeyChangeAck", link::FrameType::KeyChangeAck);

  py::class_<link::SecureFrame>(m, "SecureFrame")
      .def_property_readonly("src",
                             [](const link::SecureFrame& f) { return f.src.value; })
      .def_property_readonly("dst",
                             [](const link::SecureFrame& f) { return f.dst.value; })
      .def_readonly("frame_counter", &link::SecureFrame::frame_counter)
      .def_readonly("frame_type", &link::SecureFrame::frame_type)
      .def_property_readonly(
          "ciphertext",
          [](const link::SecureFrame& f) { return to_bytes(f.ciphertext); })
      .def_property_readonly("mic", [](const link::SecureFrame& f) {
        return py::bytes(reinterpret_cast<const char*>(f.mic.data()), f.mic.size());
      });

  m.def("seal_frame",
        [](const py::bytes& plaintext, link::FrameType type, uint16_t src,
           uint16_t dst, uint32_t counter, const py::bytes& key) {
          auto pt = to_vec(plaintext);
          return link::seal(pt, type, {src}, {dst}, counter, key_from_bytes(key));
        },
        py::arg("plaintext"), py::arg("frame_type"), py::arg("src"), py::arg("dst"),
        py::arg("counter"), py::arg("key"));
  m.def("open_frame",
        [](const link::SecureFrame& frame, const py::bytes& key, uint16_t peer) {
          auto res = link::open(frame, key_from_bytes(key), {peer});
          const char* status = res.status == link::OpenStatus::Ok      ? "Ok"
                               : res.status == link::OpenStatus::BadMic ? "BadMic"
                                                                         : "Replay";
          const char* verdict =
              res.verdict == link::SourceVerdict::Trusted ? "Trusted" : "Foreign";
          return py::make_tuple(status, verdict, to_bytes(res.plaintext));
        },
        py::arg("frame"), py::arg("key"), py::arg("expected_peer"));
  m.def("encode_frame",
        [](const link::SecureFrame& f) { return to_bytes(link::encode_frame(f)); });
  m.def("decode_frame", [](const py::bytes& wire) {
    auto v = to_vec(wire);
    auto res = link::decode_frame(v);
    if (res.status != link::DecodeStatus::Ok) {
      const char* name = res.status == link::DecodeStatus::FrameTooShort ? "FrameTooShort"
                         : res.status == link::DecodeStatus::BadSync     ? "BadSync"
                         : res.status == link::DecodeStatus::BadChecksum ? "BadChecksum"
                                                                         : "BadFrameType";
      throw ParseError(name);
    }
    return res.frame;
  });

  m.def("run_scenario", [](const std::string& config_json) {
    auto cfg = sim::ScenarioConfig::from_json_text(config_json);
    auto result = sim::run_scenario(cfg);
    py::list events;
    for (const auto& e : result.events) events.append(event_to_dict(e));
    py::list trajectory;
    for (const auto& p : result.trajectory) {
      py::dict d;
      d["tick"] = p.tick;
      d["x"] = p.x;
      d["y"] = p.y;
      d["mode"] = sim::to_string(p.mode);
      trajectory.append(d);
    }
    py::dict out;
    out["events"] = events;
    out["trajectory"] = trajectory;
    out["verdict"] = sim::to_string(result.verdict);
    return out;
  }, py::arg("config_json"));
  m.def("run_scenario_file", [](const std::string& path) {
    auto cfg = sim::ScenarioConfig::load(path);
    auto result = sim::run_scenario(cfg);
    return py::make_tuple(sim::to_string(result.verdict),
                          sim::events_to_jsonl(result.events),
                          sim::trajectory_to_csv(result.trajectory));
  }, py::arg("path"));
}
