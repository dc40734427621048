#include "mfjump.h"

#include <string>
#include <vector>

#include "mfjump/errors.hpp"
#include "mfjump/run.hpp"

namespace {

thread_local std::string g_last_error;

mfj_status status_of(const mfjump::Error& e) {
    using mfjump::Errc;
    switch (e.code()) {
        case Errc::ConfigError:
        case Errc::EmptyMarkSpace:
        case Errc::NonFiniteCoefficient:
        case Errc::BadImpulseOrder:
        case Errc::MissingY0:
        case Errc::DriverNotLinear:
            return MFJ_CONFIG_ERROR;
        default:
            return MFJ_NUMERIC_ERROR;
    }
}

} // namespace

struct mfj_run {
    mfjump::RunConfig cfg;
};

struct mfj_result {
    std::string json;
    std::string text;
    std::vector<std::pair<std::string, std::string>> artifacts;
    int exit_code = 0;
};

extern "C" {

const char* mfj_version(void) { return "0.1.0"; }

mfj_status mfj_run_create(const char* config_text, mfj_run** out) {
    if (!out) return MFJ_INVALID_ARG;
    *out = nullptr;
    if (!config_text) {
        g_last_error = "config_text is null";
        return MFJ_INVALID_ARG;
    }
    try {
        auto run = new mfj_run{mfjump::RunConfig::parse(config_text)};
        *out = run;
        return MFJ_OK;
    } catch (const mfjump::Error& e) {
        g_last_error = e.what();
        return status_of(e);
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return MFJ_CONFIG_ERROR;
    }
}

mfj_status mfj_run_set(mfj_run* run, const char* key, const char* value) {
    if (!run || !key || !value) {
        g_last_error = "null argument";
        return MFJ_INVALID_ARG;
    }
    run->cfg.set(key, value);
    return MFJ_OK;
}

mfj_status mfj_run_exec(mfj_run* run, const char* command, mfj_result** out) {
    if (!out) return MFJ_INVALID_ARG;
    *out = nullptr;
    if (!run || !command) {
        g_last_error = "null argument";
        return MFJ_INVALID_ARG;
    }
    try {
        mfjump::RunOutput r = mfjump::run_command(command, run->cfg);
        auto res = new mfj_result{std::move(r.json), std::move(r.text), std::move(r.artifacts),
                                  r.exit_code};
        *out = res;
        return res->exit_code == 0 ? MFJ_OK : MFJ_SMP_FAIL;
    } catch (const mfjump::Error& e) {
        g_last_error = e.what();
        return status_of(e);
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return MFJ_NUMERIC_ERROR;
    }
}

const char* mfj_result_json(const mfj_result* res) { return res ? res->json.c_str() : ""; }
const char* mfj_result_text(const mfj_result* res) { return res ? res->text.c_str() : ""; }

size_t mfj_result_artifact_count(const mfj_result* res) { return res ? res->artifacts.size() : 0; }

const char* mfj_result_artifact_name(const mfj_result* res, size_t index) {
    if (!res || index >= res->artifacts.size()) return "";
    return res->artifacts[index].first.c_str();
}

const char* mfj_result_artifact_data(const mfj_result* res, size_t index) {
    if (!res || index >= res->artifacts.size()) return "";
    return res->artifacts[index].second.c_str();
}

int mfj_result_exit_code(const mfj_result* res) { return res ? res->exit_code : MFJ_INVALID_ARG; }

void mfj_result_free(mfj_result* res) { delete res; }
void mfj_run_free(mfj_run* run) { delete run; }

const char* mfj_last_error(void) { return g_last_error.c_str(); }

} // extern "C"
