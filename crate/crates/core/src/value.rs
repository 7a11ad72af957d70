//! Dynamic message values: the in-memory tree for generated and ingested
//! instances, with wire-format and protobuf-JSON codecs driven by the schema.

use std::collections::BTreeMap;

use base64::Engine as _;

use crate::error::{Error, Result};
use crate::schema::{Cardinality, FieldInfo, FieldKind, MessageInfo, SchemaGraph};
use crate::wire::{
    self, Cursor, WIRE_FIXED32, WIRE_FIXED64, WIRE_LEN, WIRE_VARINT,
};

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Double(f64),
    Float(f32),
    /// int32, sint32, sfixed32
    Int32(i32),
    /// int64, sint64, sfixed64
    Int64(i64),
    /// uint32, fixed32
    UInt32(u32),
    /// uint64, fixed64
    UInt64(u64),
    Bool(bool),
    Str(String),
    Bytes(Vec<u8>),
    /// Enum value by number.
    Enum(i32),
    Message(MessageValue),
}

impl Value {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Double(v) => Some(*v),
            Value::Float(v) => Some(*v as f64),
            Value::Int32(v) => Some(*v as f64),
            Value::Int64(v) => Some(*v as f64),
            Value::UInt32(v) => Some(*v as f64),
            Value::UInt64(v) => Some(*v as f64),
            _ => None,
        }
    }

    /// Canonical string key used by frequency tables. Enums are resolved to
    /// their declared name by the caller where a schema is available.
    pub fn canon_key(&self) -> String {
        match self {
            Value::Double(v) => format!("{v}"),
            Value::Float(v) => format!("{v}"),
            Value::Int32(v) => format!("{v}"),
            Value::Int64(v) => format!("{v}"),
            Value::UInt32(v) => format!("{v}"),
            Value::UInt64(v) => format!("{v}"),
            Value::Bool(v) => format!("{v}"),
            Value::Str(v) => v.clone(),
            Value::Bytes(v) => base64::engine::general_purpose::STANDARD.encode(v),
            Value::Enum(v) => format!("{v}"),
            Value::Message(_) => String::from("<message>"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FieldValue {
    Single(Value),
    Repeated(Vec<Value>),
}

/// A dynamically-typed message instance, keyed by field number.
#[derive(Debug, Clone, PartialEq)]
pub struct MessageValue {
    pub type_name: String,
    pub fields: BTreeMap<u32, FieldValue>,
}

impl MessageValue {
    pub fn new(type_name: impl Into<String>) -> MessageValue {
        MessageValue {
            type_name: type_name.into(),
            fields: BTreeMap::new(),
        }
    }

    pub fn set(&mut self, number: u32, value: FieldValue) {
        self.fields.insert(number, value);
    }

    pub fn get(&self, number: u32) -> Option<&FieldValue> {
        self.fields.get(&number)
    }

    pub fn get_by_name<'a>(&'a self, info: &MessageInfo, name: &str) -> Option<&'a FieldValue> {
        let field = info.field(name)?;
        self.fields.get(&field.number)
    }
}

fn field_by_number(info: &MessageInfo, number: u32) -> Option<&FieldInfo> {
    info.fields.iter().find(|f| f.number == number)
}

// ---------------------------------------------------------------------------
// Wire encoding
// ---------------------------------------------------------------------------

fn scalar_wire_type(kind: FieldKind) -> u32 {
    match kind {
        FieldKind::Double | FieldKind::Fixed64 | FieldKind::SFixed64 => WIRE_FIXED64,
        FieldKind::Float | FieldKind::Fixed32 | FieldKind::SFixed32 => WIRE_FIXED32,
        FieldKind::String | FieldKind::Bytes | FieldKind::Message => WIRE_LEN,
        _ => WIRE_VARINT,
    }
}

fn encode_scalar(kind: FieldKind, value: &Value, schema: &SchemaGraph, out: &mut Vec<u8>) -> Result<()> {
    match (kind, value) {
        (FieldKind::Double, Value::Double(v)) => out.extend_from_slice(&v.to_le_bytes()),
        (FieldKind::Float, Value::Float(v)) => out.extend_from_slice(&v.to_le_bytes()),
        (FieldKind::Int32, Value::Int32(v)) => wire::encode_varint(*v as i64 as u64, out),
        (FieldKind::Int64, Value::Int64(v)) => wire::encode_varint(*v as u64, out),
        (FieldKind::UInt32, Value::UInt32(v)) => wire::encode_varint(*v as u64, out),
        (FieldKind::UInt64, Value::UInt64(v)) => wire::encode_varint(*v, out),
        (FieldKind::SInt32, Value::Int32(v)) => wire::encode_varint(wire::zigzag32(*v), out),
        (FieldKind::SInt64, Value::Int64(v)) => wire::encode_varint(wire::zigzag64(*v), out),
        (FieldKind::Fixed32, Value::UInt32(v)) => out.extend_from_slice(&v.to_le_bytes()),
        (FieldKind::Fixed64, Value::UInt64(v)) => out.extend_from_slice(&v.to_le_bytes()),
        (FieldKind::SFixed32, Value::Int32(v)) => out.extend_from_slice(&v.to_le_bytes()),
        (FieldKind::SFixed64, Value::Int64(v)) => out.extend_from_slice(&v.to_le_bytes()),
        (FieldKind::Bool, Value::Bool(v)) => wire::encode_varint(*v as u64, out),
        (FieldKind::Enum, Value::Enum(v)) => wire::encode_varint(*v as i64 as u64, out),
        (FieldKind::String, Value::Str(v)) => {
            wire::encode_varint(v.len() as u64, out);
            out.extend_from_slice(v.as_bytes());
        }
        (FieldKind::Bytes, Value::Bytes(v)) => {
            wire::encode_varint(v.len() as u64, out);
            out.extend_from_slice(v);
        }
        (FieldKind::Message, Value::Message(m)) => {
            let body = encode_message(m, schema)?;
            wire::encode_varint(body.len() as u64, out);
            out.extend_from_slice(&body);
        }
        (kind, value) => {
            return Err(Error::Validation(format!(
                "value {value:?} does not match field kind {kind:?}"
            )))
        }
    }
    Ok(())
}

/// Serializes a message value to wire bytes. Fields are written in field
/// number order; repeated numeric fields are packed.
pub fn encode_message(msg: &MessageValue, schema: &SchemaGraph) -> Result<Vec<u8>> {
    let info = schema.message(&msg.type_name)?;
    let mut out = Vec::new();
    for (&number, fv) in &msg.fields {
        let field = field_by_number(info, number).ok_or_else(|| Error::UnknownField {
            message: msg.type_name.clone(),
            field: format!("#{number}"),
        })?;
        match fv {
            FieldValue::Single(v) => {
                wire::encode_tag(number, scalar_wire_type(field.kind), &mut out);
                encode_scalar(field.kind, v, schema, &mut out)?;
            }
            FieldValue::Repeated(values) => {
                if values.is_empty() {
                    continue;
                }
                let packable = !matches!(
                    field.kind,
                    FieldKind::String | FieldKind::Bytes | FieldKind::Message
                );
                if packable {
                    let mut body = Vec::new();
                    for v in values {
                        encode_scalar(field.kind, v, schema, &mut body)?;
                    }
                    wire::encode_tag(number, WIRE_LEN, &mut out);
                    wire::encode_varint(body.len() as u64, &mut out);
                    out.extend_from_slice(&body);
                } else {
                    for v in values {
                        wire::encode_tag(number, WIRE_LEN, &mut out);
                        encode_scalar(field.kind, v, schema, &mut out)?;
                    }
                }
            }
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Wire decoding
// ---------------------------------------------------------------------------

fn decode_varint_value(kind: FieldKind, raw: u64) -> Value {
    match kind {
        FieldKind::Int32 => Value::Int32(raw as i64 as i32),
        FieldKind::Int64 => Value::Int64(raw as i64),
        FieldKind::UInt32 => Value::UInt32(raw as u32),
        FieldKind::UInt64 => Value::UInt64(raw),
        FieldKind::SInt32 => Value::Int32(wire::unzigzag32(raw)),
        FieldKind::SInt64 => Value::Int64(wire::unzigzag64(raw)),
        FieldKind::Bool => Value::Bool(raw != 0),
        FieldKind::Enum => Value::Enum(raw as i64 as i32),
        _ => unreachable!("not a varint kind"),
    }
}

fn decode_scalar(kind: FieldKind, cur: &mut Cursor<'_>, schema: &SchemaGraph, type_name: Option<&str>) -> Result<Value> {
    Ok(match kind {
        FieldKind::Double => Value::Double(f64::from_le_bytes(cur.read_fixed64()?.to_le_bytes())),
        FieldKind::Float => Value::Float(f32::from_le_bytes(cur.read_fixed32()?.to_le_bytes())),
        FieldKind::Fixed32 => Value::UInt32(cur.read_fixed32()?),
        FieldKind::Fixed64 => Value::UInt64(cur.read_fixed64()?),
        FieldKind::SFixed32 => Value::Int32(cur.read_fixed32()? as i32),
        FieldKind::SFixed64 => Value::Int64(cur.read_fixed64()? as i64),
        FieldKind::String => {
            let offset = cur.offset();
            let bytes = cur.read_len_delimited()?;
            let s = std::str::from_utf8(bytes).map_err(|_| Error::WireDecode {
                offset,
                reason: "string field is not valid UTF-8".into(),
            })?;
            Value::Str(s.to_string())
        }
        FieldKind::Bytes => Value::Bytes(cur.read_len_delimited()?.to_vec()),
        FieldKind::Message => {
            let offset = cur.offset();
            let bytes = cur.read_len_delimited()?;
            let name = type_name.unwrap_or("");
            let mut sub = Cursor::with_base(bytes, offset + 1);
            Value::Message(decode_message_cursor(&mut sub, name, schema)?)
        }
        _ => decode_varint_value(kind, cur.read_varint()?),
    })
}

/// Parses wire bytes into a message value. Unknown field numbers are skipped.
pub fn decode_message(bytes: &[u8], type_name: &str, schema: &SchemaGraph) -> Result<MessageValue> {
    let mut cur = Cursor::new(bytes);
    decode_message_cursor(&mut cur, type_name, schema)
}

fn decode_message_cursor(
    cur: &mut Cursor<'_>,
    type_name: &str,
    schema: &SchemaGraph,
) -> Result<MessageValue> {
    let info = schema.message(type_name)?;
    let mut msg = MessageValue::new(type_name);
    while !cur.is_empty() {
        let (number, wt) = cur.read_tag()?;
        let Some(field) = field_by_number(info, number) else {
            cur.skip_field(wt)?;
            continue;
        };
        let expected = scalar_wire_type(field.kind);
        let packable = !matches!(
            field.kind,
            FieldKind::String | FieldKind::Bytes | FieldKind::Message
        );
        if field.cardinality == Cardinality::Repeated && packable && wt == WIRE_LEN {
            // packed encoding
            let offset = cur.offset();
            let bytes = cur.read_len_delimited()?;
            let mut sub = Cursor::with_base(bytes, offset + 1);
            let entry = msg
                .fields
                .entry(number)
                .or_insert_with(|| FieldValue::Repeated(Vec::new()));
            let FieldValue::Repeated(values) = entry else {
                unreachable!()
            };
            while !sub.is_empty() {
                values.push(decode_scalar(field.kind, &mut sub, schema, field.type_name.as_deref())?);
            }
            continue;
        }
        if wt != expected {
            return Err(Error::WireDecode {
                offset: cur.offset(),
                reason: format!(
                    "field {type_name}.{} has wire type {wt}, expected {expected}",
                    field.name
                ),
            });
        }
        let value = decode_scalar(field.kind, cur, schema, field.type_name.as_deref())?;
        if field.cardinality == Cardinality::Repeated {
            match msg
                .fields
                .entry(number)
                .or_insert_with(|| FieldValue::Repeated(Vec::new()))
            {
                FieldValue::Repeated(values) => values.push(value),
                _ => unreachable!(),
            }
        } else {
            msg.set(number, FieldValue::Single(value));
        }
    }
    Ok(msg)
}

// ---------------------------------------------------------------------------
// JSON encoding/decoding (canonical protobuf-JSON conventions)
// ---------------------------------------------------------------------------

pub fn snake_to_camel(name: &str) -> String {
    let mut out = String::with_capacity(name.len());
    let mut upper_next = false;
    for ch in name.chars() {
        if ch == '_' {
            upper_next = true;
        } else if upper_next {
            out.extend(ch.to_uppercase());
            upper_next = false;
        } else {
            out.push(ch);
        }
    }
    out
}

fn scalar_to_json(value: &Value, field: &FieldInfo, schema: &SchemaGraph) -> Result<serde_json::Value> {
    use serde_json::json;
    Ok(match value {
        Value::Double(v) => {
            if v.is_finite() {
                json!(v)
            } else {
                json!(v.to_string())
            }
        }
        Value::Float(v) => {
            if v.is_finite() {
                json!(*v as f64)
            } else {
                json!(v.to_string())
            }
        }
        Value::Int32(v) => json!(v),
        Value::UInt32(v) => json!(v),
        // 64-bit integers are serialized as strings per protobuf JSON
        Value::Int64(v) => json!(v.to_string()),
        Value::UInt64(v) => json!(v.to_string()),
        Value::Bool(v) => json!(v),
        Value::Str(v) => json!(v),
        Value::Bytes(v) => json!(base64::engine::general_purpose::STANDARD.encode(v)),
        Value::Enum(n) => {
            let enum_name = field.type_name.as_deref().unwrap_or("");
            match schema.enum_value_name(enum_name, *n) {
                Some(name) => json!(name),
                None => json!(n),
            }
        }
        Value::Message(m) => to_json(m, schema)?,
    })
}

/// Serializes a message to canonical-style protobuf JSON (lowerCamelCase
/// names, 64-bit integers as strings, bytes as base64, enums by name).
pub fn to_json(msg: &MessageValue, schema: &SchemaGraph) -> Result<serde_json::Value> {
    let info = schema.message(&msg.type_name)?;
    let mut map = serde_json::Map::new();
    for (&number, fv) in &msg.fields {
        let field = field_by_number(info, number).ok_or_else(|| Error::UnknownField {
            message: msg.type_name.clone(),
            field: format!("#{number}"),
        })?;
        let key = snake_to_camel(&field.name);
        match fv {
            FieldValue::Single(v) => {
                map.insert(key, scalar_to_json(v, field, schema)?);
            }
            FieldValue::Repeated(values) => {
                if field.is_map {
                    // entries become a JSON object keyed by the entry key
                    let mut obj = serde_json::Map::new();
                    for v in values {
                        let Value::Message(entry) = v else { continue };
                        let entry_info = schema.message(&entry.type_name)?;
                        let key_field = entry_info.field("key");
                        let value_field = entry_info.field("value");
                        let (Some(kf), Some(vf)) = (key_field, value_field) else {
                            continue;
                        };
                        let k = entry
                            .get(kf.number)
                            .and_then(|fv| match fv {
                                FieldValue::Single(v) => Some(v.canon_key()),
                                _ => None,
                            })
                            .unwrap_or_default();
                        let jv = match entry.get(vf.number) {
                            Some(FieldValue::Single(v)) => scalar_to_json(v, vf, schema)?,
                            _ => serde_json::Value::Null,
                        };
                        obj.insert(k, jv);
                    }
                    map.insert(key, serde_json::Value::Object(obj));
                } else {
                    let mut arr = Vec::with_capacity(values.len());
                    for v in values {
                        arr.push(scalar_to_json(v, field, schema)?);
                    }
                    map.insert(key, serde_json::Value::Array(arr));
                }
            }
        }
    }
    Ok(serde_json::Value::Object(map))
}

fn json_err(field: &FieldInfo, got: &serde_json::Value) -> Error {
    Error::InvalidRecord(format!(
        "field `{}` ({:?}): incompatible JSON value {got}",
        field.name, field.kind
    ))
}

fn json_to_i64(v: &serde_json::Value) -> Option<i64> {
    match v {
        serde_json::Value::Number(n) => n.as_i64().or_else(|| n.as_f64().map(|f| f as i64)),
        serde_json::Value::String(s) => s.parse().ok(),
        _ => None,
    }
}

fn json_to_u64(v: &serde_json::Value) -> Option<u64> {
    match v {
        serde_json::Value::Number(n) => n.as_u64().or_else(|| n.as_f64().map(|f| f as u64)),
        serde_json::Value::String(s) => s.parse().ok(),
        _ => None,
    }
}

pub(crate) fn scalar_from_json(
    v: &serde_json::Value,
    field: &FieldInfo,
    schema: &SchemaGraph,
) -> Result<Value> {
    Ok(match field.kind {
        FieldKind::Double => Value::Double(v.as_f64().ok_or_else(|| json_err(field, v))?),
        FieldKind::Float => Value::Float(v.as_f64().ok_or_else(|| json_err(field, v))? as f32),
        FieldKind::Int32 | FieldKind::SInt32 | FieldKind::SFixed32 => {
            Value::Int32(json_to_i64(v).ok_or_else(|| json_err(field, v))? as i32)
        }
        FieldKind::Int64 | FieldKind::SInt64 | FieldKind::SFixed64 => {
            Value::Int64(json_to_i64(v).ok_or_else(|| json_err(field, v))?)
        }
        FieldKind::UInt32 | FieldKind::Fixed32 => {
            Value::UInt32(json_to_u64(v).ok_or_else(|| json_err(field, v))? as u32)
        }
        FieldKind::UInt64 | FieldKind::Fixed64 => {
            Value::UInt64(json_to_u64(v).ok_or_else(|| json_err(field, v))?)
        }
        FieldKind::Bool => Value::Bool(v.as_bool().ok_or_else(|| json_err(field, v))?),
        FieldKind::String => Value::Str(v.as_str().ok_or_else(|| json_err(field, v))?.to_string()),
        FieldKind::Bytes => {
            let s = v.as_str().ok_or_else(|| json_err(field, v))?;
            Value::Bytes(
                base64::engine::general_purpose::STANDARD
                    .decode(s)
                    .map_err(|_| json_err(field, v))?,
            )
        }
        FieldKind::Enum => {
            let enum_name = field.type_name.as_deref().unwrap_or("");
            let values = schema.enum_values(enum_name)?;
            match v {
                serde_json::Value::String(s) => {
                    let number = values
                        .iter()
                        .find(|(name, _)| name == s)
                        .map(|(_, n)| *n)
                        .ok_or_else(|| json_err(field, v))?;
                    Value::Enum(number)
                }
                serde_json::Value::Number(n) => {
                    Value::Enum(n.as_i64().ok_or_else(|| json_err(field, v))? as i32)
                }
                _ => return Err(json_err(field, v)),
            }
        }
        FieldKind::Message => {
            let target = field.type_name.as_deref().unwrap_or("");
            Value::Message(from_json(v, target, schema)?)
        }
    })
}

/// Parses protobuf-JSON into a message value. Accepts both lowerCamelCase
/// and original field names; unknown keys are an error.
pub fn from_json(v: &serde_json::Value, type_name: &str, schema: &SchemaGraph) -> Result<MessageValue> {
    let obj = v
        .as_object()
        .ok_or_else(|| Error::InvalidRecord(format!("expected JSON object for {type_name}")))?;
    let info = schema.message(type_name)?;
    let mut by_key: BTreeMap<&str, &FieldInfo> = BTreeMap::new();
    let mut camel_names: Vec<(String, &FieldInfo)> = Vec::new();
    for f in &info.fields {
        by_key.insert(f.name.as_str(), f);
        camel_names.push((snake_to_camel(&f.name), f));
    }
    let mut msg = MessageValue::new(type_name);
    for (key, jv) in obj {
        if jv.is_null() {
            continue;
        }
        let field = by_key
            .get(key.as_str())
            .copied()
            .or_else(|| {
                camel_names
                    .iter()
                    .find(|(camel, _)| camel == key)
                    .map(|(_, f)| *f)
            })
            .ok_or_else(|| Error::UnknownField {
                message: type_name.to_string(),
                field: key.clone(),
            })?;
        if field.is_map {
            let entry_type = field.type_name.as_deref().unwrap_or("");
            let entry_info = schema.message(entry_type)?;
            let obj = jv
                .as_object()
                .ok_or_else(|| json_err(field, jv))?;
            let kf = entry_info
                .field("key")
                .ok_or_else(|| Error::UnknownField {
                    message: entry_type.to_string(),
                    field: "key".into(),
                })?
                .clone();
            let vf = entry_info
                .field("value")
                .ok_or_else(|| Error::UnknownField {
                    message: entry_type.to_string(),
                    field: "value".into(),
                })?
                .clone();
            let mut entries = Vec::with_capacity(obj.len());
            for (k, val) in obj {
                let mut entry = MessageValue::new(entry_type);
                let key_value = match kf.kind {
                    FieldKind::String => Value::Str(k.clone()),
                    _ => scalar_from_json(&serde_json::Value::String(k.clone()), &kf, schema)?,
                };
                entry.set(kf.number, FieldValue::Single(key_value));
                entry.set(vf.number, FieldValue::Single(scalar_from_json(val, &vf, schema)?));
                entries.push(Value::Message(entry));
            }
            msg.set(field.number, FieldValue::Repeated(entries));
        } else if field.cardinality == Cardinality::Repeated {
            let arr = jv.as_array().ok_or_else(|| json_err(field, jv))?;
            let mut values = Vec::with_capacity(arr.len());
            for item in arr {
                values.push(scalar_from_json(item, field, schema)?);
            }
            msg.set(field.number, FieldValue::Repeated(values));
        } else {
            msg.set(field.number, FieldValue::Single(scalar_from_json(jv, field, schema)?));
        }
    }
    Ok(msg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::testutil::*;
    use crate::schema::FieldKind;

    fn sample_schema() -> SchemaGraph {
        graph(vec![
            (
                "t.Outer",
                vec![
                    scalar("seq", 1, FieldKind::Int32),
                    scalar("name", 2, FieldKind::String),
                    scalar("score", 3, FieldKind::Double),
                    scalar("big", 4, FieldKind::Int64),
                    repeated(scalar("tags", 5, FieldKind::String)),
                    repeated(scalar("nums", 6, FieldKind::SInt64)),
                    message_field("inner", 7, "t.Inner"),
                    scalar("data", 8, FieldKind::Bytes),
                ],
            ),
            ("t.Inner", vec![scalar("flag", 1, FieldKind::Bool)]),
        ])
    }

    fn sample_message() -> MessageValue {
        let mut inner = MessageValue::new("t.Inner");
        inner.set(1, FieldValue::Single(Value::Bool(true)));
        let mut msg = MessageValue::new("t.Outer");
        msg.set(1, FieldValue::Single(Value::Int32(-5)));
        msg.set(2, FieldValue::Single(Value::Str("héllo".into())));
        msg.set(3, FieldValue::Single(Value::Double(2.5)));
        msg.set(4, FieldValue::Single(Value::Int64(1 << 40)));
        msg.set(
            5,
            FieldValue::Repeated(vec![Value::Str("a".into()), Value::Str("b".into())]),
        );
        msg.set(
            6,
            FieldValue::Repeated(vec![Value::Int64(-1), Value::Int64(7)]),
        );
        msg.set(7, FieldValue::Single(Value::Message(inner)));
        msg.set(8, FieldValue::Single(Value::Bytes(vec![0, 255, 3])));
        msg
    }

    #[test]
    fn wire_roundtrip() {
        let schema = sample_schema();
        let msg = sample_message();
        let bytes = encode_message(&msg, &schema).unwrap();
        let back = decode_message(&bytes, "t.Outer", &schema).unwrap();
        assert_eq!(msg, back);
    }

    #[test]
    fn json_roundtrip() {
        let schema = sample_schema();
        let msg = sample_message();
        let json = to_json(&msg, &schema).unwrap();
        // 64-bit integers are strings
        assert!(json.get("big").unwrap().is_string());
        let back = from_json(&json, "t.Outer", &schema).unwrap();
        assert_eq!(msg, back);
    }

    #[test]
    fn unknown_wire_field_is_skipped() {
        let schema = sample_schema();
        let msg = sample_message();
        let mut bytes = encode_message(&msg, &schema).unwrap();
        // append an unknown varint field #99
        wire::encode_tag(99, WIRE_VARINT, &mut bytes);
        wire::encode_varint(42, &mut bytes);
        let back = decode_message(&bytes, "t.Outer", &schema).unwrap();
        assert_eq!(msg, back);
    }

    #[test]
    fn invalid_utf8_string_is_rejected() {
        let schema = sample_schema();
        let mut bytes = Vec::new();
        wire::encode_tag(2, WIRE_LEN, &mut bytes);
        wire::encode_varint(2, &mut bytes);
        bytes.extend_from_slice(&[0xff, 0xfe]);
        assert!(decode_message(&bytes, "t.Outer", &schema).is_err());
    }

    #[test]
    fn unknown_json_key_is_an_error() {
        let schema = sample_schema();
        let json: serde_json::Value = serde_json::json!({"nope": 1});
        assert!(from_json(&json, "t.Outer", &schema).is_err());
    }

    #[test]
    fn camel_case_names_accepted() {
        let g = graph(vec![(
            "t.M",
            vec![scalar("user_type", 1, FieldKind::String)],
        )]);
        let json: serde_json::Value = serde_json::json!({"userType": "premium"});
        let msg = from_json(&json, "t.M", &g).unwrap();
        assert_eq!(
            msg.get(1),
            Some(&FieldValue::Single(Value::Str("premium".into())))
        );
        let out = to_json(&msg, &g).unwrap();
        assert_eq!(out.get("userType").unwrap(), "premium");
    }
}
