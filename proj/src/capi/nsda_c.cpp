#include "nsda/nsda.h"

#include <cstring>
#include <new>
#include <string>

#include "nsda/config.hpp"
#include "../core/runner.hpp"

struct nsda_config {
    nsda::Config cfg;
};

struct nsda_result {
    nsda::RunResult res;
};

namespace {

thread_local std::string g_last_error;

nsda_status fail(nsda_status code, const std::string& msg) {
    g_last_error = msg;
    return code;
}

template <typename F>
nsda_status guarded(F&& fn) {
    try {
        return fn();
    } catch (const std::invalid_argument& e) {
        return fail(NSDA_ERR_INVALID_ARGUMENT, e.what());
    } catch (const std::exception& e) {
        return fail(NSDA_ERR_RUNTIME, e.what());
    } catch (...) {
        return fail(NSDA_ERR_RUNTIME, "unknown error");
    }
}

} // namespace

extern "C" {

const char* nsda_version(void) { return nsda::version_string(); }

const char* nsda_last_error(void) { return g_last_error.c_str(); }

nsda_status nsda_config_create(nsda_config** out) {
    if (!out) return fail(NSDA_ERR_INVALID_ARGUMENT, "null output pointer");
    return guarded([&] {
        *out = new nsda_config{};
        return NSDA_OK;
    });
}

nsda_status nsda_config_from_file(const char* path, nsda_config** out) {
    if (!path || !out) return fail(NSDA_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&]() -> nsda_status {
        auto* c = new nsda_config{};
        try {
            c->cfg = nsda::parse_config_file(path);
        } catch (...) {
            delete c;
            throw;
        }
        *out = c;
        return NSDA_OK;
    });
}

nsda_status nsda_config_from_string(const char* text, nsda_config** out) {
    if (!text || !out) return fail(NSDA_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&]() -> nsda_status {
        auto* c = new nsda_config{};
        try {
            c->cfg = nsda::parse_config_text(text, "<string>");
        } catch (...) {
            delete c;
            throw;
        }
        *out = c;
        return NSDA_OK;
    });
}

nsda_status nsda_config_set(nsda_config* cfg, const char* dotted_key,
                            const char* value) {
    if (!cfg || !dotted_key || !value)
        return fail(NSDA_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        nsda::config_set_key(cfg->cfg, dotted_key, value);
        return NSDA_OK;
    });
}

nsda_status nsda_config_serialize(const nsda_config* cfg, char** out_text) {
    if (!cfg || !out_text) return fail(NSDA_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        const std::string s = nsda::serialize_config(cfg->cfg);
        char* buf = new char[s.size() + 1];
        std::memcpy(buf, s.c_str(), s.size() + 1);
        *out_text = buf;
        return NSDA_OK;
    });
}

void nsda_config_destroy(nsda_config* cfg) { delete cfg; }

nsda_status nsda_run(const nsda_config* cfg, const char* mode,
                     const char* out_dir, const char* replay_path,
                     int64_t seed_override, int members_override,
                     const char* bound_override, double epsilon_override,
                     nsda_result** out) {
    if (!cfg || !mode || !out_dir || !out)
        return fail(NSDA_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&]() -> nsda_status {
        nsda::RunOptions opt;
        opt.mode = mode;
        opt.out_dir = out_dir;
        if (replay_path) opt.replay_path = replay_path;
        opt.seed = seed_override;
        opt.members = members_override;
        if (bound_override) opt.bound = bound_override;
        opt.epsilon = epsilon_override;

        auto* r = new nsda_result{nsda::run_experiment(cfg->cfg, opt)};
        if (!r->res.ok) {
            const std::string msg = r->res.message;
            delete r;
            return fail(NSDA_ERR_RUNTIME, msg);
        }
        *out = r;
        return r->res.checks_passed
                   ? NSDA_OK
                   : fail(NSDA_ERR_CHECKS_FAILED, "requested checks failed");
    });
}

int nsda_result_checks_passed(const nsda_result* res) {
    return res && res->res.checks_passed ? 1 : 0;
}

const char* nsda_result_report_json(const nsda_result* res) {
    return res ? res->res.report_json.c_str() : "";
}

const char* nsda_result_manifest_path(const nsda_result* res) {
    return res ? res->res.manifest_path.c_str() : "";
}

const char* nsda_result_series_path(const nsda_result* res) {
    return res ? res->res.series_path.c_str() : "";
}

const char* nsda_result_report_path(const nsda_result* res) {
    return res ? res->res.report_path.c_str() : "";
}

const char* nsda_result_obslog_path(const nsda_result* res) {
    return res ? res->res.obslog_path.c_str() : "";
}

void nsda_result_destroy(nsda_result* res) { delete res; }

void nsda_string_free(char* s) { delete[] s; }

} // extern "C"
