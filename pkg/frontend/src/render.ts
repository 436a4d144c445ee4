// Three.js scene graph for the robot and its environment. Published render-
// frame poses are assigned to objects verbatim (the console does no frame
// math); only presentation offsets (capsule centering) happen here.

import * as THREE from "three";

import { ScenePresentation } from "./presentation.js";
import { SceneObjectMsg, WirePose, WireQuat, WireVec3 } from "./protocol.js";

const LIMB_COLORS = [0xff8844, 0xffcc44, 0x44ccff, 0x8888ff];
const SEGMENT_RADIUS = 0.02;

function setVec(target: THREE.Vector3, v: WireVec3): void {
  target.set(v.x, v.y, v.z);
}

function setQuat(target: THREE.Quaternion, q: WireQuat): void {
  target.set(q.x, q.y, q.z, q.w);
}

class LimbView {
  group = new THREE.Group();
  private segments: THREE.Mesh[] = [];
  private material: THREE.Material;
  private forceArrow: THREE.ArrowHelper;

  constructor(color: number) {
    this.material = new THREE.MeshLambertMaterial({ color, side: THREE.DoubleSide });
    this.forceArrow = new THREE.ArrowHelper(
      new THREE.Vector3(0, 1, 0), new THREE.Vector3(), 0.1, 0xff2222);
    this.forceArrow.visible = false;
    this.group.add(this.forceArrow);
  }

  applySegments(poses: WirePose[], tip: WireVec3): void {
    while (this.segments.length < poses.length) {
      const geo = new THREE.CapsuleGeometry(SEGMENT_RADIUS, 0.04, 4, 8);
      geo.rotateX(Math.PI / 2); // capsule axis along local Z
      const mesh = new THREE.Mesh(geo, this.material);
      this.segments.push(mesh);
      this.group.add(mesh);
    }
    // Segment origins are proximal ends; consecutive origins are one segment
    // apart, so center each capsule between its origin and the next (the tip
    // closes the chain).
    for (let i = 0; i < poses.length; i++) {
      const mesh = this.segments[i];
      const a = poses[i].position;
      const b = i + 1 < poses.length ? poses[i + 1].position : tip;
      mesh.position.set((a.x + b.x) / 2, (a.y + b.y) / 2, (a.z + b.z) / 2);
      setQuat(mesh.quaternion, poses[i].orientation);
      mesh.visible = true;
    }
    for (let i = poses.length; i < this.segments.length; i++) {
      this.segments[i].visible = false;
    }
  }

  applyForce(tip: WireVec3, force: WireVec3, magnitude: number): void {
    if (magnitude < 1e-6) {
      this.forceArrow.visible = false;
      return;
    }
    this.forceArrow.visible = true;
    this.forceArrow.position.set(tip.x, tip.y, tip.z);
    const dir = new THREE.Vector3(force.x, force.y, force.z).normalize();
    this.forceArrow.setDirection(dir);
    this.forceArrow.setLength(Math.min(0.05 + magnitude * 0.01, 0.6));
  }
}

export class RobotView {
  root = new THREE.Group();
  vehicle: THREE.Mesh;
  limbs: LimbView[] = [];
  private objects = new Map<string, THREE.Object3D>();
  private objectsGroup = new THREE.Group();

  constructor() {
    const body = new THREE.BoxGeometry(2 * 0.125, 2 * 0.125, 2 * 0.55);
    this.vehicle = new THREE.Mesh(
      body, new THREE.MeshLambertMaterial({ color: 0x667788, side: THREE.DoubleSide }));
    this.root.add(this.vehicle);
    for (let i = 0; i < 4; i++) {
      const limb = new LimbView(LIMB_COLORS[i]);
      this.limbs.push(limb);
      this.root.add(limb.group);
    }
    this.root.add(this.objectsGroup);
  }

  /** Pull the latest accepted frames out of the presentation state. */
  sync(p: ScenePresentation): void {
    if (p.odom) {
      setVec(this.vehicle.position, p.odom.pose.position);
      setQuat(this.vehicle.quaternion, p.odom.pose.orientation);
    }
    for (let i = 0; i < this.limbs.length; i++) {
      const msg = p.limbs[i];
      if (msg) this.limbs[i].applySegments(msg.poses, msg.tip);
      const haptic = i < 2 ? p.haptics[i] : null;
      if (msg && haptic) this.limbs[i].applyForce(msg.tip, haptic.force, haptic.magnitude);
    }
    if (p.scenario) this.syncObjects(p.scenario.objects);
  }

  private syncObjects(list: SceneObjectMsg[]): void {
    for (const obj of list) {
      let node = this.objects.get(obj.id);
      if (!node) {
        node = this.buildObject(obj);
        this.objects.set(obj.id, node);
        this.objectsGroup.add(node);
      }
      setVec(node.position, obj.position);
      setQuat(node.quaternion, obj.orientation);
    }
  }

  private buildObject(obj: SceneObjectMsg): THREE.Object3D {
    const shape = obj.shape;
    const material = new THREE.MeshLambertMaterial({
      color: obj.kinematic ? 0x557755 : 0xbb6655,
      side: THREE.DoubleSide,
    });
    if (shape.kind === "sphere") {
      return new THREE.Mesh(
        new THREE.SphereGeometry(shape.radius as number, 16, 12), material);
    }
    if (shape.kind === "box") {
      const h = shape.half_extents as number[];
      return new THREE.Mesh(new THREE.BoxGeometry(2 * h[0], 2 * h[1], 2 * h[2]), material);
    }
    if (shape.kind === "capsule") {
      const geo = new THREE.CapsuleGeometry(
        shape.radius as number, 2 * (shape.half_length as number), 4, 12);
      geo.rotateX(Math.PI / 2);
      return new THREE.Mesh(geo, material);
    }
    // halfspace: a large plane facing the normal's local +Z equivalent.
    const plane = new THREE.Mesh(
      new THREE.PlaneGeometry(40, 40),
      new THREE.MeshLambertMaterial({ color: 0x334455, side: THREE.DoubleSide }));
    return plane;
  }
}
