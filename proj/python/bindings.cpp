#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "l3guard/errors.hpp"
#include "l3guard/forge.hpp"
#include "l3guard/harness.hpp"
#include "l3guard/hypoglyph.hpp"
#include "l3guard/sdl_store.hpp"
#include "l3guard/utf8.hpp"

namespace py = pybind11;
using namespace pybind11::literals;
using namespace l3guard;

namespace {

// Messages cross the boundary as plain dicts with the dataset file's keys.
py::object to_python(const nlohmann::ordered_json& j)
{
    switch (j.type()) {
    case nlohmann::ordered_json::value_t::null:
        return py::none();
    case nlohmann::ordered_json::value_t::boolean:
        return py::bool_(j.get<bool>());
    case nlohmann::ordered_json::value_t::number_integer:
        return py::int_(j.get<std::int64_t>());
    case nlohmann::ordered_json::value_t::number_unsigned:
        return py::int_(j.get<std::uint64_t>());
    case nlohmann::ordered_json::value_t::number_float:
        return py::float_(j.get<double>());
    case nlohmann::ordered_json::value_t::string:
        return py::str(j.get_ref<const std::string&>());
    case nlohmann::ordered_json::value_t::array: {
        py::list out;
        for (const auto& v : j)
            out.append(to_python(v));
        return out;
    }
    case nlohmann::ordered_json::value_t::object: {
        py::dict out;
        for (const auto& [k, v] : j.items())
            out[py::str(k)] = to_python(v);
        return out;
    }
    default:
        break;
    }
    return py::none();
}

py::list messages_to_python(std::span<const Layer3Message> messages)
{
    py::list out;
    for (const auto& m : messages)
        out.append(to_python(to_json(m)));
    return out;
}

Layer3Message message_from_python(const py::handle& obj)
{
    auto d = obj.cast<py::dict>();
    nlohmann::json j;
    j["seq"] = d["seq"].cast<std::uint64_t>();
    j["ue_id"] = d["ue_id"].cast<std::uint32_t>();
    j["protocol"] = d["protocol"].cast<std::string>();
    j["name"] = d["name"].cast<std::string>();
    j["tmsi"] = d["tmsi"].cast<std::string>();
    j["rnti"] = d["rnti"].cast<std::int64_t>();
    auto params = nlohmann::json::array();
    if (d.contains("params"))
        for (auto p : d["params"])
            params.push_back({p.cast<py::sequence>()[0].cast<std::string>(), p.cast<py::sequence>()[1].cast<std::string>()});
    j["params"] = params;
    j["label"] = d.contains("label") ? d["label"].cast<std::string>() : std::string("Normal");
    j["manipulated"] = d.contains("manipulated") ? d["manipulated"].cast<bool>() : false;
    return message_from_json(j);
}

std::vector<Layer3Message> messages_from_python(const py::iterable& seq)
{
    std::vector<Layer3Message> out;
    for (auto item : seq)
        out.push_back(message_from_python(item));
    return out;
}

char32_t single_codepoint(const std::string& s)
{
    auto cps = utf8::decode(s);
    if (cps.size() != 1)
        throw ConfigError("substitution keys and values must be single characters");
    return cps.front();
}

SubstitutionMap map_from_python(const std::optional<std::map<std::string, std::string>>& pairs)
{
    if (!pairs)
        return SubstitutionMap::builtin_default();
    SubstitutionMap m;
    for (const auto& [src, dst] : *pairs)
        m.add(single_codepoint(src), single_codepoint(dst));
    return m;
}

ExperimentOptions options(bool deterministic_clock, bool align_splits, std::uint64_t split)
{
    ExperimentOptions o;
    o.deterministic_clock = deterministic_clock;
    o.align_splits = align_splits;
    o.test_split_start = split;
    return o;
}

std::unique_ptr<ClassificationBackend> make_backend(const std::string& kind,
                                                    const std::optional<std::vector<std::string>>& responses,
                                                    const std::optional<std::string>& endpoint)
{
    if (kind == "mock")
        return std::make_unique<MockRuleBackend>();
    if (kind == "scripted") {
        if (!responses)
            throw ConfigError("scripted backend needs responses");
        return std::make_unique<ScriptedBackend>(*responses);
    }
    if (kind == "remote") {
        BackendConfig cfg;
        cfg.apply_environment();
        if (endpoint)
            cfg.endpoint = *endpoint;
        return std::make_unique<RemoteHttpBackend>(cfg);
    }
    throw ConfigError("unknown backend '" + kind + "'");
}

py::list reports_to_python(const std::vector<EvalReport>& reports)
{
    py::list out;
    for (const auto& r : reports)
        out.append(to_python(r.to_json()));
    return out;
}

} // namespace

PYBIND11_MODULE(_l3guard, m)
{
    m.doc() = "Layer-3 SDL manipulation testbed (C++ core)";

    static py::exception<Error> base(m, "L3GuardError");
    static py::exception<EncodingError> encoding(m, "EncodingError", base.ptr());
    static py::exception<ConfigError> config(m, "ConfigError", base.ptr());
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p)
                std::rethrow_exception(p);
        } catch (const EncodingError& e) {
            encoding(e.what());
        } catch (const ConfigError& e) {
            config(e.what());
        } catch (const Error& e) {
            base(e.what());
        }
    });

    m.def("catalog", [] {
        py::list out;
        for (const auto& e : message_catalog())
            out.append(py::make_tuple(std::string(to_string(e.protocol)), std::string(e.name)));
        return out;
    });

    m.def(
        "forge",
        [](std::uint64_t seed, std::uint32_t n_ue, std::uint32_t target_total, std::uint32_t n_attacks,
           std::uint32_t n_hypoglyph_attacks, std::uint32_t n_hypoglyph_normals) {
            ForgeConfig c;
            c.seed = seed;
            c.n_ue = n_ue;
            c.target_total = target_total;
            c.n_attacks = n_attacks;
            c.n_hypoglyph_attacks = n_hypoglyph_attacks;
            c.n_hypoglyph_normals = n_hypoglyph_normals;
            auto r = forge_dataset(c);
            return py::dict("messages"_a = messages_to_python(r.messages), "hypoglyphed"_a = r.hypoglyphed);
        },
        "seed"_a = 1, "n_ue"_a = 83, "target_total"_a = 1016, "n_attacks"_a = 20, "n_hypoglyph_attacks"_a = 2,
        "n_hypoglyph_normals"_a = 3, "Synthesize the evaluation dataset.");

    m.def("read_dataset", [](const std::string& path) { return messages_to_python(read_dataset(path)); });
    m.def("write_dataset", [](const py::iterable& messages, const std::string& path) {
        write_dataset(messages_from_python(messages), path);
    });

    m.def("default_map", [] {
        std::map<std::string, std::string> out;
        const auto map = SubstitutionMap::builtin_default();
        for (const auto& [src, dst] : map.pairs())
            out[utf8::encode(std::u32string(1, src))] = utf8::encode(std::u32string(1, dst));
        return out;
    });
    m.def(
        "apply_hypoglyphs",
        [](const std::string& text, const std::optional<std::map<std::string, std::string>>& mapping) {
            return apply_hypoglyphs(text, map_from_python(mapping));
        },
        "text"_a, "mapping"_a = py::none());
    m.def("skeleton", [](const std::string& text) { return skeleton(text); });
    m.def("contains_hypoglyph", [](const std::string& text) { return contains_hypoglyph(text); });

    py::class_<SdlStore>(m, "SdlStore")
        .def(py::init<>())
        .def("append", [](SdlStore& s, const py::dict& msg) { s.append(message_from_python(msg)); })
        .def("poll_new",
             [](const SdlStore& s, std::uint64_t cursor) {
                 ReaderCursor c{cursor};
                 py::list views;
                 for (const auto& v : s.poll_new(c))
                     views.append(to_python(to_json(v)));
                 return py::make_tuple(views, c.position);
             })
        .def(
            "mutate",
            [](SdlStore& s, std::uint64_t seq, const std::optional<std::map<std::string, std::string>>& mapping) {
                s.mutate(seq, map_from_python(mapping));
            },
            "seq"_a, "mapping"_a = py::none())
        .def("version", [](const SdlStore& s, std::uint64_t seq) { return s.record(seq).version; })
        .def("__len__", &SdlStore::count);

    m.def(
        "compute_metrics",
        [](std::uint64_t tp, std::uint64_t fp, std::uint64_t tn, std::uint64_t fn) {
            const auto r = compute_metrics({tp, fp, tn, fn});
            return py::dict("accuracy"_a = r.accuracy, "precision"_a = r.precision, "recall"_a = r.recall,
                            "f1"_a = r.f1, "fpr"_a = r.fpr, "fnr"_a = r.fnr);
        },
        "tp"_a, "fp"_a, "tn"_a, "fn"_a);

    m.def("parse_verdict", [](const std::string& raw) { return std::string(to_string(parse_verdict(raw))); });
    m.def(
        "build_prompt",
        [](const py::iterable& messages, std::size_t index, int window_size) {
            const auto views = views_of(messages_from_python(messages));
            return build_prompt(window_for(views, index, window_size), PromptTemplate{}).text();
        },
        "messages"_a, "index"_a, "window_size"_a);

    m.def(
        "run_llm",
        [](const py::iterable& messages, int window_size, const std::string& backend,
           const std::optional<std::vector<std::string>>& responses, const std::optional<std::string>& endpoint,
           bool deterministic_clock, bool align_splits) {
            const auto dataset = messages_from_python(messages);
            EvalReport report;
            {
                py::gil_scoped_release release;
                auto b = make_backend(backend, responses, endpoint);
                report = run_llm_experiment(dataset, *b, PromptTemplate{}, window_size,
                                            options(deterministic_clock, align_splits, 700));
            }
            return to_python(report.to_json());
        },
        "messages"_a, "window_size"_a, "backend"_a = "mock", "responses"_a = py::none(), "endpoint"_a = py::none(),
        "deterministic_clock"_a = false, "align_splits"_a = false);

    m.def(
        "sweep_llm",
        [](const py::iterable& messages, const std::string& backend,
           const std::optional<std::vector<std::string>>& responses, bool deterministic_clock, int jobs) {
            const auto dataset = messages_from_python(messages);
            std::vector<EvalReport> reports;
            {
                py::gil_scoped_release release;
                reports = sweep_llm(
                    dataset, [&] { return make_backend(backend, responses, std::nullopt); }, PromptTemplate{},
                    options(deterministic_clock, false, 700), jobs);
            }
            return reports_to_python(reports);
        },
        "messages"_a, "backend"_a = "mock", "responses"_a = py::none(), "deterministic_clock"_a = false,
        "jobs"_a = 1);

    py::class_<AeModel>(m, "AeModel")
        .def_readonly("window_size", &AeModel::window_size)
        .def_readonly("threshold", &AeModel::threshold)
        .def_readonly("initial_loss", &AeModel::initial_loss)
        .def_readonly("final_loss", &AeModel::final_loss)
        .def_property_readonly("vocabulary", [](const AeModel& a) { return a.vocab.names(); })
        .def("save", [](const AeModel& a, const std::string& path) { a.save(path); })
        .def_static("load", [](const std::string& path) { return AeModel::load(path); });

    m.def(
        "train_autoencoder",
        [](const py::iterable& messages, int window_size, int epochs, double learning_rate, std::uint64_t seed,
           std::size_t training_count) {
            const auto dataset = messages_from_python(messages);
            AeHyperparameters hp;
            hp.epochs = epochs;
            hp.learning_rate = learning_rate;
            hp.seed = seed;
            py::gil_scoped_release release;
            return train_autoencoder(normal_training_prefix(dataset, training_count), window_size, hp);
        },
        "messages"_a, "window_size"_a, "epochs"_a = AeHyperparameters{}.epochs,
        "learning_rate"_a = AeHyperparameters{}.learning_rate, "seed"_a = AeHyperparameters{}.seed,
        "training_count"_a = 700);

    m.def(
        "run_ae",
        [](const py::iterable& messages, const AeModel& model, bool deterministic_clock) {
            const auto dataset = messages_from_python(messages);
            EvalReport report;
            {
                py::gil_scoped_release release;
                report = run_ae_experiment(dataset, model, options(deterministic_clock, false, 700));
            }
            return to_python(report.to_json());
        },
        "messages"_a, "model"_a, "deterministic_clock"_a = false);

    m.def(
        "sweep_ae",
        [](const py::iterable& messages, int epochs, int jobs) {
            const auto dataset = messages_from_python(messages);
            AeHyperparameters hp;
            hp.epochs = epochs;
            std::vector<EvalReport> reports;
            {
                py::gil_scoped_release release;
                reports = sweep_ae(dataset, hp, options(false, false, 700), jobs);
            }
            return reports_to_python(reports);
        },
        "messages"_a, "epochs"_a = AeHyperparameters{}.epochs, "jobs"_a = 1);
}
