use statrs::distribution::{ContinuousCDF, FisherSnedecor, StudentsT};

use super::{Result, StatsError};

fn check_dof(d: f64) -> Result<()> {
    if d.is_finite() && d >= 1.0 {
        Ok(())
    } else {
        Err(StatsError::InvalidDof(d))
    }
}

/// Upper tail `P(F > x)` of the F(d1, d2) distribution.
pub fn f_survival(x: f64, d1: f64, d2: f64) -> Result<f64> {
    check_dof(d1)?;
    check_dof(d2)?;
    if x.is_nan() {
        return Err(StatsError::NonFinite("F statistic".into()));
    }
    if x <= 0.0 {
        return Ok(1.0);
    }
    if x == f64::INFINITY {
        return Ok(0.0);
    }
    let dist = FisherSnedecor::new(d1, d2).map_err(|_| StatsError::InvalidDof(d1.min(d2)))?;
    Ok(dist.sf(x).clamp(0.0, 1.0))
}

/// Upper tail `P(T > x)` of Student's t with `df` degrees of freedom.
pub fn t_survival(x: f64, df: f64) -> Result<f64> {
    check_dof(df)?;
    if x.is_nan() {
        return Err(StatsError::NonFinite("t statistic".into()));
    }
    if x == 0.0 {
        return Ok(0.5);
    }
    if x.is_infinite() {
        return Ok(if x > 0.0 { 0.0 } else { 1.0 });
    }
    let dist = StudentsT::new(0.0, 1.0, df).map_err(|_| StatsError::InvalidDof(df))?;
    Ok(dist.sf(x).clamp(0.0, 1.0))
}
