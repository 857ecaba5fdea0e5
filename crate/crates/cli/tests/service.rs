// SPDX-License-Identifier: Apache-2.0

use axum::body::Body;
use axum::http::{header, Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use hvcell::interact::AbutDirection;
use hvcell::pcell::evaluate_params;
use hvcell::workbench::{Operation, Outcome, ParamOverrides};
use hvcell::{generate, Session, TechnologyData};
use hvcell_cli::service::router;
use proptest::prelude::*;
use serde_json::{json, Value};
use tower::ServiceExt;

fn app() -> Router {
    router(Session::new(TechnologyData::demo()))
}

fn rt() -> tokio::runtime::Runtime {
    tokio::runtime::Builder::new_current_thread().build().unwrap()
}

async fn call_raw(app: &Router, method: Method, uri: &str, body: Option<&str>) -> (StatusCode, Vec<u8>, Option<String>) {
    let mut req = Request::builder().method(method).uri(uri);
    if body.is_some() {
        req = req.header(header::CONTENT_TYPE, "application/json");
    }
    let req = req.body(body.map_or_else(Body::empty, |b| Body::from(b.to_string()))).unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let ctype = resp.headers().get(header::CONTENT_TYPE).map(|v| v.to_str().unwrap().to_string());
    let bytes = resp.into_body().collect().await.unwrap().to_bytes().to_vec();
    (status, bytes, ctype)
}

async fn call(app: &Router, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let text = body.map(|b| b.to_string());
    let (status, bytes, _) = call_raw(app, method, uri, text.as_deref()).await;
    let v = if bytes.is_empty() { Value::Null } else { serde_json::from_slice(&bytes).unwrap() };
    (status, v)
}

async fn post(app: &Router, uri: &str, body: Value) -> (StatusCode, Value) {
    call(app, Method::POST, uri, Some(body)).await
}

async fn get(app: &Router, uri: &str) -> (StatusCode, Value) {
    call(app, Method::GET, uri, None).await
}

#[test]
fn layers_come_from_the_technology() {
    rt().block_on(async {
        let (s, v) = get(&app(), "/v1/tech/layers").await;
        assert_eq!(s, StatusCode::OK);
        let names: Vec<&str> = v.as_array().unwrap().iter().map(|l| l["name"].as_str().unwrap()).collect();
        assert!(names.contains(&"met1") && names.contains(&"poly1"));
    });
}

#[test]
fn create_and_fetch_a_cell() {
    rt().block_on(async {
        let app = app();
        let (s, v) = post(&app, "/v1/cells", json!({"device": "nmos5", "params": {"fingers": 3}})).await;
        assert_eq!(s, StatusCode::OK);
        assert_eq!(v["cell_id"], "c1");
        assert_eq!(v["params"]["fingers"], 3);
        assert_eq!(v["handles"].as_array().unwrap().len(), 2);
        let (s, fetched) = get(&app, "/v1/cells/c1").await;
        assert_eq!(s, StatusCode::OK);
        assert_eq!(fetched, v);
    });
}

#[test]
fn schema_and_parameter_errors_are_400() {
    rt().block_on(async {
        let app = app();
        let (s, _, _) = call_raw(&app, Method::POST, "/v1/cells", Some("{not json")).await;
        assert_eq!(s, StatusCode::BAD_REQUEST);
        let (s, _) = post(&app, "/v1/cells", json!({"params": {}})).await;
        assert_eq!(s, StatusCode::BAD_REQUEST);
        let (s, _) = post(&app, "/v1/cells", json!({"device": "nmos5", "colour": "red"})).await;
        assert_eq!(s, StatusCode::BAD_REQUEST);
        let (s, v) = post(&app, "/v1/cells", json!({"device": "nmos5", "params": {"fingers": 0}})).await;
        assert_eq!(s, StatusCode::BAD_REQUEST);
        assert!(v["error"].as_str().unwrap().contains("fingers"));
        let (s, v) = post(&app, "/v1/cells", json!({"device": "bjt"})).await;
        assert_eq!(s, StatusCode::BAD_REQUEST);
        assert!(v["error"].as_str().unwrap().contains("bjt"));
    });
}

#[test]
fn unknown_ids_are_404() {
    rt().block_on(async {
        let app = app();
        assert_eq!(get(&app, "/v1/cells/c9").await.0, StatusCode::NOT_FOUND);
        let (s, _) = post(&app, "/v1/cells/c9/stretch", json!({"handle": "length_handle", "dx": 100})).await;
        assert_eq!(s, StatusCode::NOT_FOUND);
        let (s, _) = post(&app, "/v1/design/place", json!({"cell_id": "c9", "x": 0, "y": 0})).await;
        assert_eq!(s, StatusCode::NOT_FOUND);
        let (s, _) = post(&app, "/v1/design/move", json!({"instance": "i9", "x": 0, "y": 0})).await;
        assert_eq!(s, StatusCode::NOT_FOUND);
    });
}

#[test]
fn stretch_beyond_the_maximum_pins_at_the_bound() {
    rt().block_on(async {
        let app = app();
        post(&app, "/v1/cells", json!({"device": "nmos5"})).await;
        let (s, v) = post(&app, "/v1/cells/c1/stretch", json!({"handle": "width_handle_right", "dx": 50_000_000, "dy": 0})).await;
        assert_eq!(s, StatusCode::OK);
        assert_eq!(v["params"]["wtot"], 10_000_000);
        let h = &v["handles"][1];
        assert_eq!(h["max_val"], 10000.0);
        assert_eq!(h["value"], 10_000_000);
    });
}

#[test]
fn empty_design_checks_are_empty() {
    rt().block_on(async {
        let app = app();
        let (s, v) = get(&app, "/v1/design/drc").await;
        assert_eq!((s, v), (StatusCode::OK, json!([])));
        let (s, v) = get(&app, "/v1/design/flylines").await;
        assert_eq!((s, v), (StatusCode::OK, json!([])));
        let (s, v) = get(&app, "/v1/design").await;
        assert_eq!(s, StatusCode::OK);
        assert_eq!(v["instances"], json!([]));
    });
}

/// Offset that leaves `gap` between the east and west abutment columns.
fn abut_offset(fingers: u32, gap: i64) -> i64 {
    let tech = TechnologyData::demo();
    let p = ParamOverrides { fingers: Some(fingers), ..Default::default() }.resolve("nmos5").unwrap();
    let cell = generate(&evaluate_params(&p, &tech).unwrap(), &tech).unwrap();
    let column = |d: AbutDirection| {
        let s = cell.abut_specs.iter().find(|s| s.directions.contains(&d)).unwrap();
        cell.shapes[s.shape_ref].bbox()
    };
    column(AbutDirection::East).hi.x - column(AbutDirection::West).lo.x + gap
}

#[test]
fn abutment_flow_and_conflicts() {
    rt().block_on(async {
        let app = app();
        post(&app, "/v1/cells", json!({"device": "nmos5", "params": {"fingers": 2}})).await;
        let m1 = json!({"G": "g1", "S": "mid", "D": "d1", "B": "gnd"});
        let m2 = json!({"G": "g2", "S": "mid", "D": "d2", "B": "gnd"});
        post(&app, "/v1/design/place", json!({"cell_id": "c1", "x": 0, "y": 0, "id": "m1", "nets": m1})).await;
        let (s, _) = post(&app, "/v1/design/place", json!({"cell_id": "c1", "x": 0, "y": 0, "id": "m1"})).await;
        assert_eq!(s, StatusCode::CONFLICT);
        let x = abut_offset(2, 500);
        let (s, _) = post(&app, "/v1/design/place", json!({"cell_id": "c1", "x": x, "y": 0, "id": "m2", "nets": m2})).await;
        assert_eq!(s, StatusCode::OK);

        let (s, v) = post(&app, "/v1/design/abut", json!({"a": "m1", "b": "m2"})).await;
        assert_eq!(s, StatusCode::OK);
        assert_eq!(v["case"], "no_abut", "{v}");
        assert_eq!(v["gap"], 500);
        let (s, v) = post(&app, "/v1/design/unabut", json!({"a": "m1", "b": "m2"})).await;
        assert_eq!(s, StatusCode::CONFLICT, "{v}");

        let (s, v) = post(&app, "/v1/design/move", json!({"instance": "m2", "x": abut_offset(2, 200), "y": 0})).await;
        assert_eq!(s, StatusCode::OK, "{v}");
        let (s, v) = post(&app, "/v1/design/abut", json!({"a": "m1", "b": "m2"})).await;
        assert_eq!(s, StatusCode::OK, "{v}");
        assert_eq!(v["case"], "abut", "{v}");
        assert_eq!(get(&app, "/v1/design/drc").await.1, json!([]));
        let (s, _) = post(&app, "/v1/cells/c1/stretch", json!({"handle": "width_handle_right", "dx": 1000, "dy": 0})).await;
        assert_eq!(s, StatusCode::CONFLICT);
        let (s, _) = post(&app, "/v1/design/move", json!({"instance": "m2", "x": 0, "y": 50_000})).await;
        assert_eq!(s, StatusCode::CONFLICT);
        let (s, _) = post(&app, "/v1/design/abut", json!({"a": "m1", "b": "m2"})).await;
        assert_eq!(s, StatusCode::CONFLICT);

        let (s, _) = post(&app, "/v1/design/unabut", json!({"a": "m1", "b": "m2"})).await;
        assert_eq!(s, StatusCode::OK);
        let (s, v) = post(&app, "/v1/design/move", json!({"instance": "m2", "x": 0, "y": 50_000})).await;
        assert_eq!(s, StatusCode::OK, "{v}");
    });
}

#[test]
fn lvs_gds_and_undo() {
    rt().block_on(async {
        let app = app();
        post(&app, "/v1/cells", json!({"device": "respoly"})).await;
        let nets = json!({"PLUS": "a", "MINUS": "b"});
        let (s, v) = post(&app, "/v1/design/place", json!({"cell_id": "c1", "x": 0, "y": 0, "nets": nets})).await;
        assert_eq!(s, StatusCode::OK, "{v}");
        let (s, v) = get(&app, "/v1/design/lvs").await;
        assert_eq!(s, StatusCode::OK);
        assert_eq!(v["clean"], true, "{v}");

        let (s, bytes, ctype) = call_raw(&app, Method::GET, "/v1/design/gds", None).await;
        assert_eq!(s, StatusCode::OK);
        assert_eq!(ctype.as_deref(), Some("application/octet-stream"));
        let lib = hvcell::read_gds(&bytes).unwrap();
        assert!(lib.structure("TOP").is_some());

        let (s, v) = post(&app, "/v1/design/undo", json!({})).await;
        assert_eq!(s, StatusCode::OK);
        assert_eq!(v["undone"]["op"], "place");
        assert_eq!(get(&app, "/v1/design").await.1["instances"], json!([]));
    });
}

#[test]
fn malformed_schematic_is_400() {
    rt().block_on(async {
        let (s, v) = post(&app(), "/v1/design/schematic", json!({"spice": "M1 d g\n"})).await;
        assert_eq!(s, StatusCode::BAD_REQUEST, "{v}");
    });
}

fn overrides() -> impl Strategy<Value = (usize, ParamOverrides)> {
    (0usize..4, 1u32..4, 0u32..3, prop::option::of(0u32..6)).prop_map(|(k, fingers, ring, bends)| {
        let mos = k < 2;
        (
            k,
            ParamOverrides {
                fingers: mos.then_some(fingers),
                guard_ring: mos.then(|| ["none", "20v", "50v"][ring as usize].to_string()),
                bends: if k == 2 { bends } else { None },
                ..Default::default()
            },
        )
    })
}

const DEVICES: [&str; 4] = ["nmos5", "pmos20t", "respoly", "capmim"];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn service_matches_direct_session(ops in prop::collection::vec((overrides(), -3000i64..3000, 0usize..2), 1..4)) {
        let app = app();
        let mut direct = Session::new(TechnologyData::demo());
        rt().block_on(async {
            for ((k, params), dx, side) in ops {
                let body = json!({"device": DEVICES[k], "params": params});
                let (s, via_http) = post(&app, "/v1/cells", body).await;
                let expected = direct.apply(Operation::CreateCell { device: DEVICES[k].into(), params: params.clone() });
                match expected {
                    Ok(Outcome::Cell(c)) => {
                        prop_assert_eq!(s, StatusCode::OK);
                        prop_assert_eq!(&via_http, &serde_json::to_value(&c).unwrap());
                    }
                    Ok(other) => prop_assert!(false, "unexpected {:?}", other),
                    Err(_) => {
                        prop_assert_eq!(s, StatusCode::BAD_REQUEST);
                        continue;
                    }
                }
                let id = via_http["cell_id"].as_str().unwrap().to_string();
                let handle = via_http["handles"][side.min(via_http["handles"].as_array().unwrap().len() - 1)]["name"]
                    .as_str()
                    .unwrap()
                    .to_string();
                let (s, via_http) = post(&app, &format!("/v1/cells/{id}/stretch"), json!({"handle": handle, "dx": dx, "dy": dx})).await;
                match direct.apply(Operation::Stretch { cell_id: id.clone(), handle, dx, dy: dx }) {
                    Ok(c) => {
                        prop_assert_eq!(s, StatusCode::OK);
                        prop_assert_eq!(via_http, serde_json::to_value(&c).unwrap());
                    }
                    Err(_) => prop_assert!(s.is_client_error()),
                }
            }
            let (_, design) = get(&app, "/v1/design").await;
            prop_assert_eq!(&design["journal"], &serde_json::to_value(direct.journal()).unwrap());
            Ok(())
        })?;
    }
}
