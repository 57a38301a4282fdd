//! Method selection and aggregation of verdicts for one network and period.

use super::{
    deep_test, drive_response_test, homogeneous_test, kalman_test, multirate_test, pbh_test,
    theorem1_test, topology_necessity_test, Method, Status, Verdict,
};
use crate::assemble::{build_sampled, lift_multirate, Pattern, SampledSystem};
use crate::error::{Error, Result};
use crate::matops::Tolerances;
use crate::netmodel::{classify_structure, MultilayerNetwork, StructureTag};
use crate::spectra::DeepKind;

/// Method requested by the caller.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodChoice {
    Auto,
    Fixed(Method),
}

impl MethodChoice {
    pub const NAMES: [&'static str; 10] = [
        "auto",
        "kalman",
        "pbh",
        "theorem1",
        "theorem2",
        "theorem3",
        "theorem4",
        "theorem5",
        "corollary2",
        "corollary3",
    ];

    pub fn parse(s: &str) -> Result<Self> {
        let m = match s {
            "auto" => return Ok(MethodChoice::Auto),
            "kalman" => Method::Kalman,
            "pbh" => Method::Pbh,
            "theorem1" => Method::Theorem1,
            "theorem2" => Method::Theorem2,
            "theorem3" => Method::Theorem3,
            "theorem4" => Method::Theorem4,
            "theorem5" => Method::Theorem5,
            "corollary2" => Method::Corollary2,
            "corollary3" => Method::Corollary3,
            other => {
                return Err(Error::Argument(format!(
                    "unknown method '{other}' (expected auto, kalman, pbh, theorem1..theorem5, corollary2, corollary3)"
                )))
            }
        };
        Ok(MethodChoice::Fixed(m))
    }

    pub fn name(self) -> &'static str {
        match self {
            MethodChoice::Auto => "auto",
            MethodChoice::Fixed(m) => m.name(),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct AnalysisRequest {
    pub h: f64,
    pub l: usize,
    pub pattern: Pattern,
    pub method: MethodChoice,
    pub tol: Tolerances,
}

impl AnalysisRequest {
    pub fn single_rate(h: f64) -> Self {
        AnalysisRequest {
            h,
            l: 1,
            pattern: Pattern::SingleRate,
            method: MethodChoice::Auto,
            tol: Tolerances::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct AnalysisOutcome {
    pub structure: StructureTag,
    pub request: AnalysisRequest,
    /// The pair actually tested (lifted for multi-rate patterns).
    pub system: SampledSystem,
    /// Every verdict computed, in evaluation order.
    pub verdicts: Vec<Verdict>,
    /// Index into `verdicts` of the verdict that determines `status`.
    pub primary: usize,
    pub status: Status,
}

impl AnalysisOutcome {
    pub fn primary(&self) -> &Verdict {
        &self.verdicts[self.primary]
    }

    pub fn verdict(&self, method: Method) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.method == method)
    }

    /// Reachable-subspace dimension from the Kalman cross-check.
    pub fn reach_rank(&self) -> Option<usize> {
        self.verdict(Method::Kalman)
            .and_then(|v| v.diagnostics.reach_rank)
    }

    pub fn state_dim(&self) -> usize {
        self.system.state_dim()
    }
}

fn structure_method(tag: StructureTag) -> Option<Method> {
    match tag {
        StructureTag::General => None,
        StructureTag::TwoLayerDriveResponse => Some(Method::Theorem2),
        StructureTag::HomogeneousDriveResponse => Some(Method::Theorem3),
        StructureTag::DeepChain => Some(Method::Theorem4),
        StructureTag::DeepStar => Some(Method::Theorem5),
    }
}

fn run_single(
    net: &MultilayerNetwork,
    sys: &SampledSystem,
    method: Method,
    req: &AnalysisRequest,
) -> Result<Verdict> {
    let (h, tol) = (req.h, &req.tol);
    match method {
        Method::Kalman => kalman_test(sys, tol),
        Method::Pbh => pbh_test(sys, tol),
        Method::Theorem1 => theorem1_test(net, h, tol),
        Method::Theorem2 => drive_response_test(net, h, tol),
        Method::Theorem3 => homogeneous_test(net, h, tol),
        Method::Theorem4 => deep_test(net, h, DeepKind::Chain, tol),
        Method::Theorem5 => deep_test(net, h, DeepKind::Star, tol),
        Method::Corollary2 | Method::Corollary3 => topology_necessity_test(net, h, method, tol),
        Method::Corollary4 | Method::Corollary5 | Method::Corollary6 => Err(Error::Argument(
            "multi-rate corollaries are selected through the sampling pattern".into(),
        )),
    }
}

/// Run the requested analysis. In `auto` mode the structure-specific test,
/// the matrix-equation test, PBH and Kalman are evaluated in that order and
/// the first decisive verdict determines the status; an explicit method is
/// reported as-is, with PBH and Kalman added as cross-checks.
pub fn analyze(net: &MultilayerNetwork, req: &AnalysisRequest) -> Result<AnalysisOutcome> {
    if !(req.h > 0.0) || !req.h.is_finite() {
        return Err(Error::Argument(format!(
            "sampling period must be positive, got {}",
            req.h
        )));
    }
    if req.l < 1 {
        return Err(Error::Argument("rate ratio l must be at least 1".into()));
    }
    if req.pattern == Pattern::SingleRate && req.l != 1 {
        return Err(Error::Argument("single-rate pattern requires l = 1".into()));
    }
    let tag = classify_structure(net, req.tol.eig);
    let multirate = req.pattern != Pattern::SingleRate;
    let sys = if multirate {
        lift_multirate(net, req.h, req.l, req.pattern)?
    } else {
        build_sampled(net, req.h)?
    };

    let plan: Vec<Method> = match (req.method, multirate) {
        (MethodChoice::Auto, false) => structure_method(tag)
            .into_iter()
            .chain([Method::Theorem1, Method::Pbh, Method::Kalman])
            .collect(),
        (MethodChoice::Auto, true) => vec![Method::Theorem2, Method::Pbh, Method::Kalman],
        (MethodChoice::Fixed(m), true)
            if !matches!(m, Method::Theorem2 | Method::Pbh | Method::Kalman) =>
        {
            return Err(Error::Argument(format!(
                "method '{m}' is not available for multi-rate pattern '{}'",
                req.pattern
            )))
        }
        (MethodChoice::Fixed(m), _) => {
            let mut p = vec![m];
            p.extend(
                [Method::Pbh, Method::Kalman]
                    .into_iter()
                    .filter(|x| *x != m),
            );
            p
        }
    };

    let mut verdicts = Vec::with_capacity(plan.len());
    for m in plan {
        let v = if multirate {
            match m {
                Method::Kalman => kalman_test(&sys, &req.tol)?,
                Method::Pbh => pbh_test(&sys, &req.tol)?,
                _ => multirate_test(net, req.h, req.l, req.pattern, &req.tol)?,
            }
        } else {
            run_single(net, &sys, m, req)?
        };
        verdicts.push(v);
    }
    let primary = match req.method {
        MethodChoice::Auto => verdicts
            .iter()
            .position(|v| v.status.is_decisive())
            .unwrap_or(0),
        MethodChoice::Fixed(_) => 0,
    };
    let status = verdicts[primary].status;
    Ok(AnalysisOutcome {
        structure: tag,
        request: *req,
        system: sys,
        verdicts,
        primary,
        status,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netmodel::parse_network_spec;

    fn ex(k: usize) -> MultilayerNetwork {
        let text = match k {
            1 => include_str!("../../fixtures/example1.json"),
            2 => include_str!("../../fixtures/example2.json"),
            3 => include_str!("../../fixtures/example3.json"),
            _ => include_str!("../../fixtures/example4.json"),
        };
        parse_network_spec(text).unwrap()
    }

    #[test]
    fn auto_runs_structure_test_first() {
        let out = analyze(&ex(1), &AnalysisRequest::single_rate(0.1)).unwrap();
        assert_eq!(out.status, Status::Controllable);
        assert_eq!(out.primary().method, Method::Theorem2);
        assert_eq!(out.verdicts.len(), 4);
        assert_eq!(out.reach_rank(), Some(8));
    }

    #[test]
    fn explicit_method_keeps_its_status() {
        let mut req = AnalysisRequest::single_rate(std::f64::consts::PI);
        req.method = MethodChoice::parse("theorem1").unwrap();
        let out = analyze(&ex(4), &req).unwrap();
        assert_eq!(out.status, Status::Inconclusive);
        assert_eq!(
            out.verdict(Method::Kalman).unwrap().status,
            Status::Uncontrollable
        );
    }

    #[test]
    fn multirate_plan() {
        let req = AnalysisRequest {
            l: 2,
            pattern: Pattern::SlowInterLayer,
            ..AnalysisRequest::single_rate(std::f64::consts::FRAC_PI_2)
        };
        let out = analyze(&ex(3), &req).unwrap();
        assert_eq!(out.status, Status::Uncontrollable);
        assert_eq!(out.primary().method, Method::Corollary4);
        assert_eq!(out.reach_rank(), Some(6));
    }

    #[test]
    fn bad_requests() {
        assert!(MethodChoice::parse("bogus").is_err());
        let mut req = AnalysisRequest::single_rate(0.0);
        assert!(analyze(&ex(1), &req).is_err());
        req.h = 0.1;
        req.l = 2;
        assert!(analyze(&ex(1), &req).is_err());
    }
}
