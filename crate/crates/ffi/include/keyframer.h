#ifndef KEYFRAMER_H
#define KEYFRAMER_H

#include <stdbool.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

/*
 * Strings returned through `char **out` parameters are owned by the caller
 * and must be released with kf_string_free. Structured results are UTF-8 JSON.
 */

typedef enum KfStatus {
  KF_STATUS_OK = 0,
  KF_STATUS_NULL_ARGUMENT = 1,
  KF_STATUS_INVALID_UTF8 = 2,
  KF_STATUS_PARSE_ERROR = 3,
  KF_STATUS_NOT_FOUND = 4,
  KF_STATUS_INVALID_ARGUMENT = 5,
  KF_STATUS_PROVIDER_ERROR = 6,
  KF_STATUS_SCHEMA_ERROR = 7,
  KF_STATUS_PANIC = 8,
} KfStatus;

typedef struct KfSession KfSession;
typedef struct KfStreamParser KfStreamParser;

/* Message for the last failed call on this thread, or NULL. Valid until the next call. */
const char *kf_last_error(void);
const char *kf_version(void);
void kf_string_free(char *s);

KfStatus kf_preprocess(const char *svg, char **out_json);
KfStatus kf_lint(const char *css, const char *svg, uint32_t scope, char **out_json);
KfStatus kf_build_prompt(const char *user_text,
                         const char *svg_text,
                         uint32_t existing_design_count,
                         const char *extension_css,
                         bool corrected_template,
                         char **out_prompt);
KfStatus kf_parse_response(const char *response, char **out_json);

KfStreamParser *kf_stream_parser_new(void);
KfStatus kf_stream_parser_feed(KfStreamParser *parser, const char *chunk, char **out_events_json);
KfStatus kf_stream_parser_finish(KfStreamParser *parser, char **out_events_json);
void kf_stream_parser_free(KfStreamParser *parser);

KfStatus kf_session_new(const char *svg, KfSession **out);
KfStatus kf_session_import(const char *log_json, KfSession **out);
void kf_session_free(KfSession *session);
KfStatus kf_session_export(KfSession *session, char **out_json);
KfStatus kf_session_snapshot(KfSession *session, char **out_json);
KfStatus kf_session_run_with_response(KfSession *session,
                                      const char *prompt_text,
                                      const char *base_design_id,
                                      const char *response_text,
                                      double elapsed_seconds,
                                      char **out_json);
KfStatus kf_session_code_edit(KfSession *session, const char *design, const char *css, char **out_json);
KfStatus kf_session_toggle_favorite(KfSession *session, const char *design, bool *out_favorite);
KfStatus kf_session_stats(KfSession *session, char **out_json);

#ifdef __cplusplus
}
#endif

#endif
