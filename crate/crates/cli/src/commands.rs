//! Operators on serialized objects: `apply`, `klain`, `emit-plotdata`, `info`.

use std::f64::consts::TAU;
use std::fmt::Write as _;

use anyhow::{anyhow, bail, Context, Result};
use clap::ValueEnum;

use valf_core::even3d::{fourier_even, klain_function, lambda_numeric, EvenValuation3, Grassmannian, KlainFunction, SphereGrid};
use valf_core::functorial::{pullback, pushforward, MeasureValuation, Val, Valuation};
use valf_core::io::Document;
use valf_core::linmap::LinearMapSpec;
use valf_core::polytope::{Body, Polytope};
use valf_core::trig::TrigPoly;
use valf_core::val1::Valuation1;
use valf_core::val2::Valuation2;

use crate::config::Config;
use crate::suites::{registry, SUITES};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Op {
    Product,
    Convolve,
    Fourier,
    Euler,
    Lambda,
    Pushforward,
    Pullback,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum GrArg {
    Lines,
    Planes,
}

impl From<GrArg> for Grassmannian {
    fn from(g: GrArg) -> Self {
        match g {
            GrArg::Lines => Grassmannian::Lines,
            GrArg::Planes => Grassmannian::Planes,
        }
    }
}

/// Operand in graded form.
enum Graded {
    Line(Valuation1),
    Plane(Valuation2),
    Space(EvenValuation3),
    Klain(KlainFunction),
}

impl Graded {
    fn space(&self) -> &'static str {
        match self {
            Graded::Line(_) => "R¹",
            Graded::Plane(_) => "R²",
            Graded::Space(_) | Graded::Klain(_) => "R³",
        }
    }

    fn into_document(self) -> Result<Document> {
        Ok(match self {
            Graded::Line(v) => Document::valuation1(&v),
            Graded::Plane(v) => Document::valuation2(&v),
            Graded::Klain(k) => Document::klain(&k),
            Graded::Space(EvenValuation3::Intrinsic(c)) => Document::Even3 {
                valuation: valf_core::io::Even3Json::Intrinsic { coefficients: c },
            },
            Graded::Space(_) => bail!("this valuation on R³ has no closed form; write its Klain function instead"),
        })
    }
}

/// `Σ c·vol(• + A)` on the line as `c0·χ + c1·vol`.
fn line_graded(m: &MeasureValuation) -> Valuation1 {
    m.terms()
        .iter()
        .fold(Valuation1::new(0.0, 0.0), |v, (c, a)| Valuation1::new(v.c0 + c * a.volume(), v.c1 + c))
}

/// `Σ c·vol(• + A)` in the plane; polygon support functions are truncated
/// at the band limit.
fn plane_graded(m: &MeasureValuation, band: usize) -> Result<Valuation2> {
    m.terms().iter().try_fold(Valuation2::zero(), |v, (c, a)| {
        Ok(v.add(&Valuation2::from_body_measure(&a.to_planar()?, band).scale(*c)))
    })
}

fn graded(doc: Document, band: usize) -> Result<Graded> {
    Ok(match doc {
        Document::Valuation1 { .. } => Graded::Line(doc.into_valuation1()?),
        Document::Valuation2 { .. } => Graded::Plane(doc.into_valuation2()?),
        Document::Body { .. } => Graded::Plane(Valuation2::from_body_measure(&doc.into_body()?, band)),
        Document::Measure { dim, .. } => {
            let m = doc.into_measure()?;
            match dim {
                1 => Graded::Line(line_graded(&m)),
                2 => Graded::Plane(plane_graded(&m, band)?),
                _ => bail!("measure-type valuations on R^{dim} have no graded form; push or pull them to R¹ or R² first"),
            }
        }
        Document::Even3 { .. } => Graded::Space(doc.into_even3()?),
        Document::Klain { .. } => Graded::Klain(doc.into_klain()?),
        Document::Map { .. } => bail!("a linear map is not a valuation"),
    })
}

fn klain_of(phi: &EvenValuation3) -> Result<KlainFunction> {
    let gr = match phi.degree() {
        Some(1) => Grassmannian::Lines,
        Some(2) => Grassmannian::Planes,
        d => bail!("Klain functions exist for homogeneous degree 1 or 2 on R³, got degree {d:?}"),
    };
    Ok(klain_function(phi, gr)?)
}

/// Converts a valuation on the line given as a black box to `c0·χ + c1·vol`.
fn line_from_values(v: &dyn Valuation) -> Result<Valuation1> {
    let c0 = v.evaluate(&Body::Polytope(Polytope::point(&[0.0])))?;
    let c1 = v.evaluate(&Body::Polytope(Polytope::interval(0.0, 1.0)))? - c0;
    Ok(Valuation1::new(c0, c1))
}

fn functorial_output(v: Val) -> Result<Document> {
    match &v {
        Val::Measure(m) => Ok(Document::measure(m)),
        Val::Line(l) => Ok(Document::valuation1(l)),
        Val::Plane(p) => Ok(Document::valuation2(p)),
        Val::Numeric(_) if v.dim() == 1 => Ok(Document::valuation1(&line_from_values(&v)?)),
        Val::Numeric(_) => bail!(
            "the result on R^{} is not of measure type and only valuations on R¹ can be written numerically",
            v.dim()
        ),
    }
}

fn functorial_input(doc: Document) -> Result<Val> {
    Ok(match doc {
        Document::Measure { .. } => Val::Measure(doc.into_measure()?),
        Document::Valuation1 { .. } => Val::Line(doc.into_valuation1()?),
        Document::Valuation2 { .. } => Val::Plane(doc.into_valuation2()?),
        Document::Body { .. } => Val::Measure(MeasureValuation::body(1.0, Body::planar(doc.into_body()?)?)),
        d => bail!("{} documents cannot be pushed or pulled along linear maps", d.kind()),
    })
}

fn same_space(op: &str, a: &Graded, b: &Graded) -> Result<()> {
    if a.space() != b.space() {
        bail!(
            "{op} is graded on a single space: operands live on {} and {}",
            a.space(),
            b.space()
        );
    }
    Ok(())
}

/// Applies `op` and returns the result with its graded summary.
pub fn apply(op: Op, inputs: Vec<Document>, config: &Config) -> Result<(Document, String)> {
    let band = config.band_limit;
    let arity = match op {
        Op::Product | Op::Convolve | Op::Pushforward | Op::Pullback => 2,
        _ => 1,
    };
    if inputs.len() != arity {
        bail!("{op:?} takes {arity} input(s), got {}", inputs.len());
    }
    let doc = match op {
        Op::Product | Op::Convolve => {
            let mut it = inputs.into_iter();
            let a = graded(it.next().unwrap(), band)?;
            let b = graded(it.next().unwrap(), band)?;
            let name = if op == Op::Product { "the product" } else { "the convolution" };
            same_space(name, &a, &b)?;
            match (a, b) {
                (Graded::Line(x), Graded::Line(y)) => Graded::Line(if op == Op::Product { x.product(&y) } else { x.convolve(&y) }),
                (Graded::Plane(x), Graded::Plane(y)) => {
                    Graded::Plane(if op == Op::Product { x.product(&y) } else { x.convolve(&y) })
                }
                _ => bail!("{name} of valuations on R³ is not implemented; only the even Fourier transform and Λ are"),
            }
            .into_document()?
        }
        Op::Fourier => match graded(inputs.into_iter().next().unwrap(), band)? {
            Graded::Line(v) => Document::valuation1(&v.fourier()),
            Graded::Plane(v) => Document::valuation2(&v.fourier()),
            Graded::Klain(k) => Document::klain(&fourier_even(&k)),
            Graded::Space(v) => Document::klain(&fourier_even(&klain_of(&v)?)),
        },
        Op::Euler => match graded(inputs.into_iter().next().unwrap(), band)? {
            // translation-invariant valuations on the line and even ones on R³ are fixed by E
            Graded::Plane(v) => Document::valuation2(&v.euler()),
            g => g.into_document()?,
        },
        Op::Lambda => match graded(inputs.into_iter().next().unwrap(), band)? {
            // d/dε |K + ε[−1, 1]| = 2
            Graded::Line(v) => Document::valuation1(&Valuation1::new(2.0 * v.c1, 0.0)),
            Graded::Plane(v) => Document::valuation2(&v.lambda_op()),
            Graded::Space(v @ EvenValuation3::Intrinsic(_)) => Graded::Space(lambda_numeric(&v)?).into_document()?,
            Graded::Space(_) => bail!("Λ of this valuation on R³ has no closed form; only intrinsic-volume combinations do"),
            Graded::Klain(_) => bail!("Λ acts on valuations, not on Klain functions"),
        },
        Op::Pushforward | Op::Pullback => {
            let (maps, rest): (Vec<_>, Vec<_>) = inputs.into_iter().partition(|d| matches!(d, Document::Map { .. }));
            let (Some(map), Some(val)) = (maps.into_iter().next(), rest.into_iter().next()) else {
                bail!("{op:?} needs one map document and one valuation document");
            };
            let f: LinearMapSpec = map.into_map()?;
            let phi = functorial_input(val)?;
            let out = if op == Op::Pushforward {
                if phi.dim() != f.source_dim() {
                    bail!("pushforward needs a valuation on the source R^{}, got one on R^{}", f.source_dim(), phi.dim());
                }
                pushforward(&f, &phi).context("pushforward")?
            } else {
                if phi.dim() != f.target_dim() {
                    bail!("pullback needs a valuation on the target R^{}, got one on R^{}", f.target_dim(), phi.dim());
                }
                pullback(&f, &phi).context("pullback")?
            };
            functorial_output(out)?
        }
    };
    let summary = summarize(&doc)?;
    Ok((doc, summary))
}

/// Graded decomposition of a document, for terminal output.
pub fn summarize(doc: &Document) -> Result<String> {
    Ok(match doc {
        Document::Valuation1 { c0, c1 } => format!("degree 0: {c0:.6}·χ\ndegree 1: {c1:.6}·vol"),
        Document::Valuation2 { .. } => doc.clone().into_valuation2()?.summary(),
        Document::Measure { dim, terms } => {
            let total: f64 = terms.iter().map(|t| t.c).sum();
            format!("measure-type valuation on R^{dim}: {} term(s), top-degree coefficient {total:.6}·vol", terms.len())
        }
        Document::Even3 { .. } => match doc.clone().into_even3()? {
            EvenValuation3::Intrinsic(c) => {
                let mut s = String::new();
                for (k, x) in c.iter().enumerate() {
                    let _ = writeln!(s, "degree {k}: {x:.6}·V{k}");
                }
                s.trim_end().to_string()
            }
            v => format!("even valuation on R³ of degree {:?}", v.degree()),
        },
        Document::Klain { .. } => {
            let k = doc.clone().into_klain()?;
            let (lo, hi) = k
                .values()
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
            format!(
                "Klain function on {}-dimensional subspaces: {} samples, range [{lo:.6}, {hi:.6}]",
                k.grassmannian().dim(),
                k.values().len()
            )
        }
        Document::Body { .. } => {
            let b = doc.clone().into_body()?;
            format!("planar body: area {:.6}, perimeter {:.6}", b.area(), b.perimeter())
        }
        Document::Map { .. } => {
            let f = doc.clone().into_map()?;
            format!("linear map R^{} → R^{} of rank {}", f.source_dim(), f.target_dim(), f.rank())
        }
    })
}

pub fn klain(doc: Document, gr: Option<GrArg>) -> Result<Document> {
    let phi = match doc {
        Document::Even3 { .. } => doc.into_even3()?,
        d => bail!("Klain functions are computed from even3 documents, got {}", d.kind()),
    };
    let k = match gr {
        Some(g) => klain_function(&phi, g.into())?,
        None => klain_of(&phi)?,
    };
    Ok(Document::klain(&k))
}

/// CSV plot data: circle functions as `(theta, value)` on `grid` angles,
/// Klain functions as `(x, y, z, value)` on the sphere grid.
pub fn plotdata(doc: Document, config: &Config) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let circle = |w: &mut csv::Writer<Vec<u8>>, name: &str, f: &TrigPoly| -> Result<()> {
        w.write_record(["theta", name])?;
        for i in 0..config.grid {
            let t = TAU * i as f64 / config.grid as f64;
            w.serialize((t, f.eval(t)))?;
        }
        Ok(())
    };
    let sphere = |w: &mut csv::Writer<Vec<u8>>, k: &KlainFunction| -> Result<()> {
        w.write_record(["x", "y", "z", "value"])?;
        for row in k.rows() {
            w.serialize(row)?;
        }
        Ok(())
    };
    match doc {
        Document::Valuation1 { c0, c1 } => {
            w.write_record(["degree", "coefficient"])?;
            w.serialize((0, c0))?;
            w.serialize((1, c1))?;
        }
        Document::Valuation2 { .. } => circle(&mut w, "density", doc.into_valuation2()?.density())?,
        Document::Measure { dim: 2, .. } => {
            circle(&mut w, "density", plane_graded(&doc.into_measure()?, config.band_limit)?.density())?
        }
        Document::Body { .. } => {
            let b = doc.into_body()?;
            w.write_record(["theta", "support"])?;
            for i in 0..config.grid {
                let t = TAU * i as f64 / config.grid as f64;
                w.serialize((t, b.support_at(t)))?;
            }
        }
        Document::Klain { .. } => sphere(&mut w, &doc.into_klain()?)?,
        Document::Even3 { .. } => sphere(&mut w, &klain_of(&doc.into_even3()?)?)?,
        d => bail!("no plot data for {} documents", d.kind()),
    }
    String::from_utf8(w.into_inner().map_err(|e| anyhow!("{e}"))?).context("CSV is UTF-8")
}

pub fn info(config: &Config) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "valf {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(s, "config: {}", serde_json::to_string(config).expect("config serializes"));
    let grid = SphereGrid::ico4();
    let _ = writeln!(
        s,
        "sphere grid: level {} icosphere, {} vertices, {} faces",
        grid.level,
        grid.vertices.len(),
        grid.faces.len()
    );
    let reg = registry();
    for suite in SUITES {
        let _ = writeln!(s, "suite {suite}:");
        for c in reg.iter().filter(|c| c.suite == suite) {
            let _ = writeln!(s, "  {:<44} tol {:.0e}  {}", c.id, c.tolerance(config), c.anchor);
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(s: &str) -> Document {
        Document::parse(s).unwrap()
    }

    #[test]
    fn fourier_of_chi_is_vol() {
        let cfg = Config::default();
        let (out, _) = apply(Op::Fourier, vec![Document::valuation1(&Valuation1::chi())], &cfg).unwrap();
        assert_eq!(out.into_valuation1().unwrap(), Valuation1::vol());
        let (out, _) = apply(Op::Fourier, vec![Document::valuation2(&Valuation2::chi())], &cfg).unwrap();
        assert_eq!(out.into_valuation2().unwrap(), Valuation2::vol());
    }

    #[test]
    fn vol_is_the_convolution_unit() {
        let cfg = Config::default();
        let phi = Valuation2::new(0.5, TrigPoly::cos_mode(3, 1.0), -2.0);
        let (out, _) = apply(
            Op::Convolve,
            vec![Document::valuation2(&Valuation2::vol()), Document::valuation2(&phi)],
            &cfg,
        )
        .unwrap();
        assert_eq!(out.into_valuation2().unwrap(), phi);
    }

    #[test]
    fn lambda_of_area_is_the_perimeter_density() {
        let cfg = Config::default();
        let (out, summary) = apply(Op::Lambda, vec![Document::valuation2(&Valuation2::vol())], &cfg).unwrap();
        let v = out.into_valuation2().unwrap();
        assert_eq!(v, Valuation2::degree1(TrigPoly::constant(1.0)));
        assert!(summary.contains("degree 1"));
    }

    #[test]
    fn grading_mismatch_is_named() {
        let cfg = Config::default();
        let err = apply(
            Op::Product,
            vec![Document::valuation1(&Valuation1::chi()), Document::valuation2(&Valuation2::chi())],
            &cfg,
        )
        .unwrap_err();
        assert!(err.to_string().contains("R¹ and R²"), "{err}");
        let map = doc(r#"{"kind":"map","rows":1,"cols":2,"data":[1,0]}"#);
        let err = apply(Op::Pushforward, vec![map, Document::valuation1(&Valuation1::vol())], &cfg).unwrap_err();
        assert!(err.to_string().contains("source R^2"), "{err}");
    }

    #[test]
    fn pushforward_of_a_triangle_measure() {
        let cfg = Config::default();
        let map = doc(r#"{"kind":"map","rows":1,"cols":2,"data":[1,0]}"#);
        let m = doc(r#"{"kind":"measure","dim":2,"terms":[{"c":1,"body":{"type":"polygon","vertices":[[0,0],[2,0],[1,3]]}}]}"#);
        let (out, _) = apply(Op::Pushforward, vec![map.clone(), m], &cfg).unwrap();
        let pushed = out.into_measure().unwrap();
        assert!((pushed.terms()[0].1.volume() - 2.0).abs() < 1e-15);
        // pulling vol(• + A) back along the x-axis: |A| + t·(height of A)
        let m = doc(r#"{"kind":"measure","dim":2,"terms":[{"c":1,"body":{"type":"polygon","vertices":[[0,0],[2,0],[1,3]]}}]}"#);
        let incl = doc(r#"{"kind":"map","rows":2,"cols":1,"data":[1,0]}"#);
        let (out, _) = apply(Op::Pullback, vec![incl, m], &cfg).unwrap();
        let v = out.into_valuation1().unwrap();
        assert!((v.c0 - 3.0).abs() < 1e-12 && (v.c1 - 3.0).abs() < 1e-12, "{v:?}");
    }

    #[test]
    fn plot_data_examples() {
        let cfg = Config {
            grid: 16,
            ..Config::default()
        };
        let csv = plotdata(Document::valuation2(&Valuation2::v1()), &cfg).unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("theta,density"));
        assert!(lines.all(|l| l.ends_with(",0.5")));
        let k = klain_function(&EvenValuation3::intrinsic_volume_k(1), Grassmannian::Lines).unwrap();
        let csv = plotdata(Document::klain(&k), &cfg).unwrap();
        assert!(csv.starts_with("x,y,z,value\n"));
        assert_eq!(csv.lines().count(), 1 + k.rows().len());
        for l in csv.lines().skip(1) {
            let v: f64 = l.rsplit(',').next().unwrap().parse().unwrap();
            assert!((v - 1.0).abs() < 1e-12, "{l}");
        }
    }

    #[test]
    fn klain_of_a_cube_has_cubic_symmetry() {
        let cube = doc(
            r#"{"kind":"even3","valuation":{"variant":"brightness","radius":0,
                "vertices":[[0,0,0],[1,0,0],[0,1,0],[1,1,0],[0,0,1],[1,0,1],[0,1,1],[1,1,1]]}}"#,
        );
        let k = klain(cube, None).unwrap().into_klain().unwrap();
        use nalgebra::Vector3;
        // shadow areas: 1 along an axis, √3 along a main diagonal
        for u in [Vector3::x(), Vector3::y(), Vector3::z()] {
            assert!((k.at(&u) - 1.0 / 3.0).abs() < 5e-3, "{}", k.at(&u));
        }
        let diag = k.at(&Vector3::new(1.0, 1.0, 1.0).normalize());
        assert!((diag - 3f64.sqrt() / 3.0).abs() < 5e-3, "{diag}");
        assert!(klain(Document::valuation1(&Valuation1::chi()), None).is_err());
    }
}
