//! Scalar and vector fields backed by expressions, plus the evaluation trait
//! shared with fields that only exist numerically (streamline-borne Poisson
//! vectors, flow-projected quantities).

use super::{parse_scalar, validate_params, Expr, Jet2, Params};
use crate::{tol, Result, M3, R3};

/// Scalar function of position defined by an expression.
#[derive(Debug, Clone)]
pub struct ScalarField {
    pub expr: Expr,
    pub params: Params,
}

impl ScalarField {
    pub fn new(expr: Expr, params: Params) -> Result<Self> {
        validate_params(&params)?;
        Ok(ScalarField { expr, params })
    }

    pub fn parse(src: &str, params: &Params) -> Result<Self> {
        validate_params(params)?;
        Ok(ScalarField {
            expr: parse_scalar(src, params)?,
            params: params.clone(),
        })
    }

    pub fn value(&self, x: &R3) -> Result<f64> {
        self.expr.value(x, &self.params)
    }

    pub fn jet(&self, x: &R3) -> Result<Jet2> {
        self.expr.jet(x, &self.params)
    }

    pub fn gradient(&self, x: &R3) -> Result<R3> {
        Ok(self.jet(x)?.grad)
    }
}

/// Vector field with expression components over a shared parameter set.
#[derive(Debug, Clone)]
pub struct FieldDef {
    pub components: [Expr; 3],
    pub params: Params,
}

/// Value and first derivatives of a vector quantity.
#[derive(Debug, Clone, Copy)]
pub struct VectorJet {
    pub value: R3,
    /// `jacobian[(i, j)]` is the derivative of component `i` along axis `j`.
    pub jacobian: M3,
}

/// Value, Jacobian and per-component Hessians of a vector field.
#[derive(Debug, Clone, Copy)]
pub struct FieldJet {
    pub value: R3,
    pub jacobian: M3,
    pub hessians: [M3; 3],
}

impl FieldDef {
    pub fn new(components: [Expr; 3], params: Params) -> Self {
        FieldDef { components, params }
    }

    pub fn value(&self, x: &R3) -> Result<R3> {
        Ok(R3::new(
            self.components[0].value(x, &self.params)?,
            self.components[1].value(x, &self.params)?,
            self.components[2].value(x, &self.params)?,
        ))
    }

    pub fn jet(&self, x: &R3) -> Result<FieldJet> {
        let mut value = R3::zeros();
        let mut jacobian = M3::zeros();
        let mut hessians = [M3::zeros(); 3];
        for i in 0..3 {
            let j = self.components[i].jet(x, &self.params)?;
            value[i] = j.value;
            jacobian.set_row(i, &j.grad.transpose());
            hessians[i] = j.hess;
        }
        Ok(FieldJet { value, jacobian, hessians })
    }
}

impl FieldJet {
    pub fn vector_jet(&self) -> VectorJet {
        VectorJet {
            value: self.value,
            jacobian: self.jacobian,
        }
    }
}

/// Anything that can be evaluated as a vector field. The Jacobian defaults
/// to central differences; expression-backed fields override it with the
/// exact jet.
pub trait VectorField {
    fn value_at(&self, x: &R3) -> Result<R3>;

    fn vector_jet_at(&self, x: &R3) -> Result<VectorJet> {
        let h = self.fd_step();
        let mut jacobian = M3::zeros();
        for j in 0..3 {
            let mut xp = *x;
            let mut xm = *x;
            xp[j] += h;
            xm[j] -= h;
            let col = (self.value_at(&xp)? - self.value_at(&xm)?) / (2.0 * h);
            jacobian.set_column(j, &col);
        }
        Ok(VectorJet {
            value: self.value_at(x)?,
            jacobian,
        })
    }

    /// Step used by the finite-difference fallback.
    fn fd_step(&self) -> f64 {
        tol::FRAME_FD_STEP
    }
}

impl VectorField for FieldDef {
    fn value_at(&self, x: &R3) -> Result<R3> {
        self.value(x)
    }

    fn vector_jet_at(&self, x: &R3) -> Result<VectorJet> {
        Ok(self.jet(x)?.vector_jet())
    }
}

/// Gradient of a scalar expression as a standalone vector field; the
/// Jacobian is the exact Hessian from the second-order jet.
#[derive(Debug, Clone)]
pub struct GradField(pub ScalarField);

impl VectorField for GradField {
    fn value_at(&self, x: &R3) -> Result<R3> {
        self.0.gradient(x)
    }

    fn vector_jet_at(&self, x: &R3) -> Result<VectorJet> {
        let jet = self.0.jet(x)?;
        Ok(VectorJet {
            value: jet.grad,
            jacobian: jet.hess,
        })
    }
}

/// Linear combination `a + c b` of two fields, used for Poisson pencils.
pub struct Pencil<'a> {
    pub a: &'a dyn VectorField,
    pub b: &'a dyn VectorField,
    pub c: f64,
}

impl VectorField for Pencil<'_> {
    fn value_at(&self, x: &R3) -> Result<R3> {
        Ok(self.a.value_at(x)? + self.b.value_at(x)? * self.c)
    }

    fn vector_jet_at(&self, x: &R3) -> Result<VectorJet> {
        let a = self.a.vector_jet_at(x)?;
        let b = self.b.vector_jet_at(x)?;
        Ok(VectorJet {
            value: a.value + b.value * self.c,
            jacobian: a.jacobian + b.jacobian * self.c,
        })
    }
}
