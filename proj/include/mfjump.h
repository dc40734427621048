/* mfjump shared-library C interface.
 *
 * Opaque handles + status codes; all outputs are returned as UTF-8 strings
 * (a JSON summary plus named CSV artifacts) owned by the result handle.
 * Status codes mirror the CLI exit codes so callers can script against them.
 */
#ifndef MFJUMP_H
#define MFJUMP_H

#include <stddef.h>

#if defined(_WIN32)
#define MFJ_API __declspec(dllexport)
#else
#define MFJ_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mfj_status {
    MFJ_OK = 0,
    MFJ_SMP_FAIL = 1,     /* command ran, an SMP verdict is FAIL */
    MFJ_CONFIG_ERROR = 2, /* bad config / validation failure */
    MFJ_NUMERIC_ERROR = 3,/* Picard/fixed-point divergence, non-finite state */
    MFJ_INVALID_ARG = 4   /* null handle, unknown command, ... */
} mfj_status;

typedef struct mfj_run mfj_run;
typedef struct mfj_result mfj_result;

MFJ_API const char* mfj_version(void);

/* Parse INI-style configuration text (sections [spec] [marks] [mc]
 * [tolerances]). On success *out owns the run handle. */
MFJ_API mfj_status mfj_run_create(const char* config_text, mfj_run** out);

/* Override one configuration entry, e.g. mfj_run_set(r, "mc.seed", "42"). */
MFJ_API mfj_status mfj_run_set(mfj_run* run, const char* dotted_key, const char* value);

/* Execute a command: "simulate", "solve-lq", "verify-smp", "compare",
 * "convergence". Returns MFJ_OK or MFJ_SMP_FAIL with a result in *out;
 * other statuses leave *out null. */
MFJ_API mfj_status mfj_run_exec(mfj_run* run, const char* command, mfj_result** out);

/* JSON summary document (lifetime: until mfj_result_free). */
MFJ_API const char* mfj_result_json(const mfj_result* res);

/* Human-readable summary intended for stdout (may be empty). */
MFJ_API const char* mfj_result_text(const mfj_result* res);

/* Named CSV artifacts. */
MFJ_API size_t mfj_result_artifact_count(const mfj_result* res);
MFJ_API const char* mfj_result_artifact_name(const mfj_result* res, size_t index);
MFJ_API const char* mfj_result_artifact_data(const mfj_result* res, size_t index);

/* 0 pass, 1 SMP FAIL (mirrors mfj_status of the exec call). */
MFJ_API int mfj_result_exit_code(const mfj_result* res);

MFJ_API void mfj_result_free(mfj_result* res);
MFJ_API void mfj_run_free(mfj_run* run);

/* Message for the most recent failing call on this thread ("" if none). */
MFJ_API const char* mfj_last_error(void);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* MFJUMP_H */
