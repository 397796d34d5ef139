#pragma once

#include <string>

#include "switchaff/design.hpp"
#include "switchaff/rate.hpp"

namespace sa {

// System files: {"n": int, "N": int, "A": [[..]..], "b": [[..]..],
// "labels": [..] (optional)}.
SwitchedAffineSystem system_from_json(const std::string& text);
std::string system_to_json(const SwitchedAffineSystem& sys);

// Disturbance files: {"E": [..], "breakpoints": [..], "values": [..]}.
DisturbanceProfile disturbance_from_json(const std::string& text, int n);

// Certificate report: blocks of P, margins, lambda, x_e, and a checklist of
// the verified hypotheses.
std::string law_report_json(const SwitchingLaw& law,
                            const CertificateReport& report);

std::string rate_report_json(const RateCertificate& cert,
                             const SosResult& sos);

std::string rate_curve_json(const std::vector<RateCurveRow>& rows);

// Writes text to path via a temp file in the same directory plus rename.
void atomic_write(const std::string& path, const std::string& text);

}  // namespace sa
