use std::fs;
use std::path::{Path, PathBuf};

use log::info;

use super::{BasinArgs, Failure, PoseArgs, RefineArgs, RenderArgs, SceneArgs, ScheduleArgs, ScoringArgs, StudyArgs};
use crate::error::{Error, Result};
use crate::eval::{
    basin_offsets, basin_profile, convergence_study, domain_shift_profile, summarize_errors, BasinAxis,
    RECALL_THRESHOLDS,
};
use crate::features::{ExternalFeatures, FeatureExtractor, PyramidConfig};
use crate::filter::{Preset, Schedule, VERTICAL_DAMPING};
use crate::geometry::{perturb_pose_exact, pose_error, read_pose_file, write_pose_file, Intrinsics, NamedPose, Pose};
use crate::refiner::{Query, Refiner, Scorer};
use crate::renderer::{
    load_image, load_mesh, load_mesh_with_texture, render, save_image, Image, RoomLayout, Scene, ShadingMode,
    SyntheticSpec,
};
use crate::seed;

/// Minimum free view distance of cameras sampled in synthetic rooms, meters.
const SAMPLED_VIEW_DISTANCE: f64 = 3.0;

fn config<T>(r: Result<T>) -> std::result::Result<T, Failure> {
    r.map_err(Failure::Config)
}

fn runtime<T>(r: Result<T>) -> std::result::Result<T, Failure> {
    r.map_err(Failure::Runtime)
}

struct LoadedScene {
    scene: Scene,
    layout: Option<RoomLayout>,
    intrinsics: Intrinsics,
    description: String,
}

impl LoadedScene {
    fn load(args: &SceneArgs) -> Result<LoadedScene> {
        let (scene, layout, source) = match (&args.scene, args.synthetic) {
            (Some(path), _) => {
                let scene = match &args.texture {
                    Some(tex) => load_mesh_with_texture(path, tex)?,
                    None => load_mesh(path)?,
                };
                (scene, None, format!("scene={}", path.display()))
            }
            (None, Some(s)) => {
                let layout = RoomLayout::generate(&SyntheticSpec {
                    seed: s,
                    ..SyntheticSpec::default()
                })?;
                (layout.scene.clone(), Some(layout), format!("scene=synthetic:{s}"))
            }
            (None, None) => return Err(Error::config("scene", "either --scene or --synthetic is required")),
        };
        let intrinsics = match (&args.intrinsics, &layout) {
            (Some(text), _) => parse_intrinsics(text)?,
            (None, Some(_)) => Intrinsics::new(100.0, 100.0, 80.0, 60.0, 160, 120)?,
            (None, None) => return Err(Error::config("intrinsics", "required for mesh scenes")),
        };
        let description = format!("{source} intrinsics={}", format_intrinsics(&intrinsics));
        Ok(LoadedScene {
            scene,
            layout,
            intrinsics,
            description,
        })
    }

    fn diagonal(&self) -> f64 {
        self.scene.diagonal()
    }

    /// Camera `index` of a synthetic room sampled from `seed`.
    fn sampled_camera(&self, seed: u64, index: u64, key: &str) -> Result<Pose> {
        let layout = self
            .layout
            .as_ref()
            .ok_or_else(|| Error::config(key, "required unless --synthetic is used"))?;
        let mut rng = seed::stream(seed, &[seed::name_id("camera"), index]);
        Ok(layout.sample_camera(&mut rng, SAMPLED_VIEW_DISTANCE))
    }
}

fn parse_intrinsics(text: &str) -> Result<Intrinsics> {
    let bad = || Error::config("intrinsics", format!("expected `fx,fy,cx,cy,width,height`, got `{text}`"));
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.len() != 6 {
        return Err(bad());
    }
    let f: Vec<f64> = parts[..4]
        .iter()
        .map(|p| p.parse::<f64>().map_err(|_| bad()))
        .collect::<Result<_>>()?;
    let w: u32 = parts[4].parse().map_err(|_| bad())?;
    let h: u32 = parts[5].parse().map_err(|_| bad())?;
    Intrinsics::new(f[0], f[1], f[2], f[3], w, h).map_err(|e| Error::config("intrinsics", e.to_string()))
}

fn format_intrinsics(i: &Intrinsics) -> String {
    format!("{},{},{},{},{},{}", i.fx, i.fy, i.cx, i.cy, i.width, i.height)
}

fn parse_list(key: &str, text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite() && *v >= 0.0)
                .ok_or_else(|| Error::config(key, format!("invalid magnitude `{p}` in `{text}`")))
        })
        .collect()
}

fn build_schedule(args: &ScheduleArgs, diagonal: f64) -> Result<Schedule> {
    let preset: Preset = args.preset.parse()?;
    let mut sched = preset.schedule(diagonal);
    if let Some(path) = &args.config {
        sched.load_config(path)?;
    }
    for kv in &args.overrides {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::config("set", format!("expected KEY=VALUE, got `{kv}`")))?;
        sched.set(k.trim(), v)?;
    }
    if let Some(s) = args.seed {
        sched.seed = s;
    }
    sched.validate()?;
    Ok(sched)
}

struct Scoring {
    scorer: Scorer,
    extractor: Box<dyn FeatureExtractor>,
    mode: ShadingMode,
}

impl Scoring {
    fn load(args: &ScoringArgs) -> Result<Scoring> {
        let scorer: Scorer = args.scorer.parse()?;
        let extractor: Box<dyn FeatureExtractor> = if args.features == "builtin" {
            Box::new(PyramidConfig::default())
        } else {
            let dir = Path::new(&args.features);
            if !dir.is_dir() {
                return Err(Error::config("features", format!("`{}` is neither `builtin` nor a directory", dir.display())));
            }
            Box::new(ExternalFeatures::open(dir).map_err(|e| Error::config("features", e.to_string()))?)
        };
        let mode = parse_mode(&args.mode)?;
        Ok(Scoring { scorer, extractor, mode })
    }

    fn description(&self) -> String {
        format!(
            "scorer={} features={} mode={}",
            self.scorer,
            self.extractor.describe(),
            self.mode
        )
    }
}

fn parse_mode(text: &str) -> Result<ShadingMode> {
    text.parse().map_err(|e: Error| Error::config("mode", e.to_string()))
}

fn pick_pose(args: &PoseArgs, scene: &LoadedScene, seed: u64) -> Result<(Pose, String)> {
    match &args.pose {
        Some(path) => {
            let poses = read_pose_file(path)?;
            let found = match &args.name {
                Some(name) => poses.iter().find(|p| &p.name == name),
                None => poses.first(),
            };
            let p = found.ok_or_else(|| {
                Error::config(
                    "pose",
                    format!(
                        "no pose {}in {}",
                        args.name.as_ref().map(|n| format!("named `{n}` ")).unwrap_or_default(),
                        path.display()
                    ),
                )
            })?;
            Ok((p.pose, format!("pose={}:{}", path.display(), p.name)))
        }
        None => Ok((scene.sampled_camera(seed, 0, "pose")?, format!("pose=sampled:{seed}"))),
    }
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

fn find_query_image(dir: &Path, name: &str) -> Result<PathBuf> {
    ["png", "ppm"]
        .iter()
        .map(|ext| dir.join(format!("{name}.{ext}")))
        .find(|p| p.is_file())
        .ok_or_else(|| {
            Error::config(
                "queries",
                format!("no `{name}.png` or `{name}.ppm` in {}", dir.display()),
            )
        })
}

struct RefineSetup {
    scene: LoadedScene,
    schedule: Schedule,
    scoring: Scoring,
    gt: Option<Vec<NamedPose>>,
    inits: Vec<NamedPose>,
    query_images: Option<Vec<Image>>,
    comment: String,
}

fn refine_setup(args: &RefineArgs) -> Result<RefineSetup> {
    let scene = LoadedScene::load(&args.scene)?;
    let schedule = build_schedule(&args.schedule, scene.diagonal())?;
    let scoring = Scoring::load(&args.scoring)?;
    let gt = args.gt.as_ref().map(read_pose_file).transpose()?;
    let inits = match (&args.init, &args.perturb, &gt) {
        (Some(path), _, _) => read_pose_file(path)?,
        (None, Some(spec), Some(gt)) => {
            let mags = parse_list("perturb", spec)?;
            let [t, r] = mags[..] else {
                return Err(Error::config("perturb", format!("expected `METERS,DEGREES`, got `{spec}`")));
            };
            gt.iter()
                .map(|p| {
                    let mut rng = seed::stream(schedule.seed, &[seed::name_id("init"), seed::name_id(&p.name)]);
                    NamedPose {
                        name: p.name.clone(),
                        pose: perturb_pose_exact(&p.pose, t, r, VERTICAL_DAMPING, &mut rng),
                    }
                })
                .collect()
        }
        _ => return Err(Error::config("init", "either --init or --gt with --perturb is required")),
    };
    if let Some(gt) = &gt {
        if let Some(p) = inits.iter().find(|p| !gt.iter().any(|g| g.name == p.name)) {
            return Err(Error::config("gt", format!("no ground-truth pose for `{}`", p.name)));
        }
    }
    let query_images = match &args.queries {
        Some(dir) => Some(
            inits
                .iter()
                .map(|p| load_image(find_query_image(dir, &p.name)?))
                .collect::<Result<Vec<_>>>()?,
        ),
        None if gt.is_some() => None,
        None => return Err(Error::config("queries", "required unless --gt is given")),
    };
    let comment = format!(
        "mcrefine refine {} {} {} queries={} init={} gt={} | {}",
        scene.description,
        scoring.description(),
        format_args!("preset={}", args.schedule.preset),
        args.queries
            .as_ref()
            .map(|d| d.display().to_string())
            .unwrap_or_else(|| "rendered-from-gt".into()),
        args.init
            .as_ref()
            .map(|d| d.display().to_string())
            .or_else(|| args.perturb.as_ref().map(|p| format!("perturb:{p}")))
            .unwrap_or_default(),
        args.gt.as_ref().map(|d| d.display().to_string()).unwrap_or_else(|| "none".into()),
        schedule.to_config_line()
    );
    Ok(RefineSetup {
        scene,
        schedule,
        scoring,
        gt,
        inits,
        query_images,
        comment,
    })
}

pub fn cmd_refine(args: &RefineArgs) -> std::result::Result<(), Failure> {
    let setup = config(refine_setup(args))?;
    config(create_dir(&args.out))?;
    runtime(run_refine(&setup, &args.out))
}

fn run_refine(s: &RefineSetup, out: &Path) -> Result<()> {
    let gt_of = |name: &str| {
        s.gt.as_ref()
            .and_then(|gt| gt.iter().find(|g| g.name == name))
            .map(|g| g.pose)
    };
    let images = match &s.query_images {
        Some(images) => images.clone(),
        None => s
            .inits
            .iter()
            .map(|p| {
                let gt = gt_of(&p.name).expect("checked during setup");
                Ok(render(&s.scene.scene, &gt, &s.scene.intrinsics, ShadingMode::Textured)?.image)
            })
            .collect::<Result<Vec<_>>>()?,
    };
    let queries: Vec<Query> = s
        .inits
        .iter()
        .zip(images)
        .map(|(p, image)| Query {
            name: p.name.clone(),
            image,
        })
        .collect();
    let inits: Vec<Pose> = s.inits.iter().map(|p| p.pose).collect();
    let refiner = Refiner {
        scene: &s.scene.scene,
        intrinsics: &s.scene.intrinsics,
        schedule: &s.schedule,
        scorer: s.scoring.scorer,
        extractor: s.scoring.extractor.as_ref(),
        shading: s.scoring.mode,
    };
    let results = refiner.refine_batch(&queries, &inits)?;

    let mut finals = Vec::with_capacity(results.len());
    let mut errors = Vec::new();
    let mut error_rows = format!("# {}\nname,trans_err,rot_err\n", s.comment);
    for (q, res) in queries.iter().zip(&results) {
        info!("{}: {} steps in {:.2}s", q.name, res.trajectory.len(), res.wall_time);
        write(&out.join(format!("trajectory_{}.csv", q.name)), res.trajectory_csv(&s.comment))?;
        finals.push(NamedPose {
            name: q.name.clone(),
            pose: res.final_pose,
        });
        if let Some(gt) = gt_of(&q.name) {
            let e = pose_error(&res.final_pose, &gt);
            error_rows.push_str(&format!("{},{},{}\n", q.name, e.trans_err, e.rot_err));
            errors.push(e);
        }
    }
    write_pose_file(out.join("final_poses.txt"), &finals, Some(&s.comment))?;
    if !errors.is_empty() {
        let summary = summarize_errors(&errors, &RECALL_THRESHOLDS)?;
        write(&out.join("summary.csv"), summary.to_csv(&s.comment))?;
        write(&out.join("errors.csv"), error_rows)?;
    }
    Ok(())
}

pub fn cmd_basin(args: &BasinArgs) -> std::result::Result<(), Failure> {
    let scene = config(LoadedScene::load(&args.scene))?;
    let scoring = config(Scoring::load(&args.scoring))?;
    let axis: BasinAxis = config(args.axis.parse())?;
    config(basin_offsets(args.range, args.samples))?;
    let (pose, pose_desc) = config(pick_pose(&args.pose, &scene, args.seed))?;
    config(create_dir(&args.out))?;
    let comment = format!(
        "mcrefine basin {} {} {pose_desc} axis={axis} range={} samples={} domains={}",
        scene.description,
        scoring.description(),
        args.range,
        args.samples,
        args.domains
    );
    runtime((|| {
        let ext = scoring.extractor.as_ref();
        let profile = basin_profile(&scene.scene, &pose, &scene.intrinsics, axis, args.range, args.samples, ext, scoring.mode)?;
        for level in 1..=profile.num_levels() {
            write(&args.out.join(format!("basin_level{level}.csv")), profile.level_csv(level, &comment)?)?;
        }
        if args.domains {
            let report = domain_shift_profile(&scene.scene, &pose, &scene.intrinsics, axis, args.range, args.samples, ext)?;
            for level in 1..=profile.num_levels() {
                write(&args.out.join(format!("domains_level{level}.csv")), report.level_csv(level, &comment)?)?;
            }
        }
        Ok(())
    })())
}

pub fn cmd_study(args: &StudyArgs) -> std::result::Result<(), Failure> {
    let scene = config(LoadedScene::load(&args.scene))?;
    let schedule = config(build_schedule(&args.schedule, scene.diagonal()))?;
    let scoring = config(Scoring::load(&args.scoring))?;
    let trans = config(parse_list("trans", &args.trans))?;
    let rot = config(parse_list("rot", &args.rot))?;
    if args.repeats == 0 {
        return Err(Failure::Config(Error::config("repeats", "must be at least 1")));
    }
    let (gts, source) = match &args.poses {
        Some(path) => {
            let poses = config(read_pose_file(path))?;
            (poses.into_iter().map(|p| p.pose).collect::<Vec<_>>(), path.display().to_string())
        }
        None => {
            let poses = (0..args.num_poses as u64)
                .map(|i| scene.sampled_camera(schedule.seed, i, "poses"))
                .collect::<Result<Vec<_>>>();
            (config(poses)?, format!("sampled:{}", args.num_poses))
        }
    };
    if gts.is_empty() {
        return Err(Failure::Config(Error::config("poses", "no ground-truth poses")));
    }
    config(create_dir(&args.out))?;
    let comment = format!(
        "mcrefine study {} {} preset={} poses={source} trans={} rot={} repeats={} | {}",
        scene.description,
        scoring.description(),
        args.schedule.preset,
        args.trans,
        args.rot,
        args.repeats,
        schedule.to_config_line()
    );
    let refiner = Refiner {
        scene: &scene.scene,
        intrinsics: &scene.intrinsics,
        schedule: &schedule,
        scorer: scoring.scorer,
        extractor: scoring.extractor.as_ref(),
        shading: scoring.mode,
    };
    runtime((|| {
        let matrix = convergence_study(&refiner, &gts, &trans, &rot, args.repeats)?;
        write(&args.out.join("study.csv"), matrix.to_csv(&comment))
    })())
}

pub fn cmd_render(args: &RenderArgs) -> std::result::Result<(), Failure> {
    let scene = config(LoadedScene::load(&args.scene))?;
    let mode = config(parse_mode(&args.mode))?;
    let intr = match args.height {
        Some(0) => return Err(Failure::Config(Error::config("height", "must be positive"))),
        Some(h) => scene.intrinsics.at_height(h),
        None => scene.intrinsics,
    };
    let (pose, pose_desc) = config(pick_pose(&args.pose, &scene, args.seed))?;
    runtime((|| {
        let view = render(&scene.scene, &pose, &intr, mode)?;
        save_image(&view.image, &args.out)?;
        if let Some(path) = &args.dump_depth {
            let comment = format!(
                "# mcrefine render depth {} {pose_desc} resolution={}x{}\n",
                scene.description, intr.height, intr.width
            );
            write(path, comment + &view.depth_csv())?;
        }
        Ok(())
    })())
}
