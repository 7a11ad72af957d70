//! Minimal decoder for serialized `FileDescriptorSet` blobs.
//!
//! Only the descriptor fields needed to build a schema graph are decoded;
//! everything else is skipped. Field numbers follow `descriptor.proto`.

use crate::error::{Error, Result};
use crate::wire::{Cursor, WIRE_LEN, WIRE_VARINT};

#[derive(Debug, Default, Clone)]
pub struct FileDescriptorSet {
    pub files: Vec<FileDescriptor>,
}

#[derive(Debug, Default, Clone)]
pub struct FileDescriptor {
    pub name: String,
    pub package: String,
    pub messages: Vec<MessageDescriptor>,
    pub enums: Vec<EnumDescriptor>,
    pub syntax: String,
}

#[derive(Debug, Default, Clone)]
pub struct MessageDescriptor {
    pub name: String,
    pub fields: Vec<FieldDescriptor>,
    pub nested_messages: Vec<MessageDescriptor>,
    pub nested_enums: Vec<EnumDescriptor>,
    pub oneof_names: Vec<String>,
    pub map_entry: bool,
}

#[derive(Debug, Default, Clone)]
pub struct FieldDescriptor {
    pub name: String,
    pub number: i32,
    /// `FieldDescriptorProto.Label`: 1 optional, 2 required, 3 repeated.
    pub label: i32,
    /// `FieldDescriptorProto.Type`: 1..=18.
    pub type_: i32,
    pub type_name: String,
    pub oneof_index: Option<i32>,
    pub proto3_optional: bool,
}

#[derive(Debug, Default, Clone)]
pub struct EnumDescriptor {
    pub name: String,
    pub values: Vec<(String, i32)>,
}

fn parse_err(cur: &Cursor<'_>, reason: impl Into<String>) -> Error {
    Error::DescriptorParse {
        offset: cur.offset(),
        reason: reason.into(),
    }
}

fn read_string(cur: &mut Cursor<'_>) -> Result<String> {
    let bytes = cur.read_len_delimited()?;
    String::from_utf8(bytes.to_vec())
        .map_err(|_| parse_err(cur, "descriptor string is not valid UTF-8"))
}

fn sub_cursor<'a>(cur: &mut Cursor<'a>) -> Result<Cursor<'a>> {
    let start = cur.offset();
    let bytes = cur.read_len_delimited()?;
    // +1 is a lower bound on the length prefix size; offsets stay monotone.
    Ok(Cursor::with_base(bytes, start + 1))
}

pub fn parse_file_descriptor_set(bytes: &[u8]) -> Result<FileDescriptorSet> {
    let mut cur = Cursor::new(bytes);
    let mut set = FileDescriptorSet::default();
    while !cur.is_empty() {
        let (num, wt) = cur.read_tag().map_err(remap)?;
        match (num, wt) {
            (1, WIRE_LEN) => {
                let mut sub = sub_cursor(&mut cur).map_err(remap)?;
                set.files.push(parse_file(&mut sub)?);
            }
            _ => cur.skip_field(wt).map_err(remap)?,
        }
    }
    Ok(set)
}

/// Descriptor parsing surfaces wire errors as descriptor parse errors.
fn remap(e: Error) -> Error {
    match e {
        Error::WireDecode { offset, reason } => Error::DescriptorParse { offset, reason },
        other => other,
    }
}

fn parse_file(cur: &mut Cursor<'_>) -> Result<FileDescriptor> {
    let mut file = FileDescriptor::default();
    while !cur.is_empty() {
        let (num, wt) = cur.read_tag().map_err(remap)?;
        match (num, wt) {
            (1, WIRE_LEN) => file.name = read_string(cur).map_err(remap)?,
            (2, WIRE_LEN) => file.package = read_string(cur).map_err(remap)?,
            (4, WIRE_LEN) => {
                let mut sub = sub_cursor(cur).map_err(remap)?;
                file.messages.push(parse_message(&mut sub)?);
            }
            (5, WIRE_LEN) => {
                let mut sub = sub_cursor(cur).map_err(remap)?;
                file.enums.push(parse_enum(&mut sub)?);
            }
            (12, WIRE_LEN) => file.syntax = read_string(cur).map_err(remap)?,
            _ => cur.skip_field(wt).map_err(remap)?,
        }
    }
    Ok(file)
}

fn parse_message(cur: &mut Cursor<'_>) -> Result<MessageDescriptor> {
    let mut msg = MessageDescriptor::default();
    while !cur.is_empty() {
        let (num, wt) = cur.read_tag().map_err(remap)?;
        match (num, wt) {
            (1, WIRE_LEN) => msg.name = read_string(cur).map_err(remap)?,
            (2, WIRE_LEN) => {
                let mut sub = sub_cursor(cur).map_err(remap)?;
                msg.fields.push(parse_field(&mut sub)?);
            }
            (3, WIRE_LEN) => {
                let mut sub = sub_cursor(cur).map_err(remap)?;
                msg.nested_messages.push(parse_message(&mut sub)?);
            }
            (4, WIRE_LEN) => {
                let mut sub = sub_cursor(cur).map_err(remap)?;
                msg.nested_enums.push(parse_enum(&mut sub)?);
            }
            (7, WIRE_LEN) => {
                let mut sub = sub_cursor(cur).map_err(remap)?;
                msg.map_entry = parse_message_options_map_entry(&mut sub)?;
            }
            (8, WIRE_LEN) => {
                let mut sub = sub_cursor(cur).map_err(remap)?;
                msg.oneof_names.push(parse_oneof_name(&mut sub)?);
            }
            _ => cur.skip_field(wt).map_err(remap)?,
        }
    }
    Ok(msg)
}

fn parse_message_options_map_entry(cur: &mut Cursor<'_>) -> Result<bool> {
    let mut map_entry = false;
    while !cur.is_empty() {
        let (num, wt) = cur.read_tag().map_err(remap)?;
        match (num, wt) {
            (7, WIRE_VARINT) => map_entry = cur.read_varint().map_err(remap)? != 0,
            _ => cur.skip_field(wt).map_err(remap)?,
        }
    }
    Ok(map_entry)
}

fn parse_oneof_name(cur: &mut Cursor<'_>) -> Result<String> {
    let mut name = String::new();
    while !cur.is_empty() {
        let (num, wt) = cur.read_tag().map_err(remap)?;
        match (num, wt) {
            (1, WIRE_LEN) => name = read_string(cur).map_err(remap)?,
            _ => cur.skip_field(wt).map_err(remap)?,
        }
    }
    Ok(name)
}

fn parse_field(cur: &mut Cursor<'_>) -> Result<FieldDescriptor> {
    let mut field = FieldDescriptor::default();
    while !cur.is_empty() {
        let (num, wt) = cur.read_tag().map_err(remap)?;
        match (num, wt) {
            (1, WIRE_LEN) => field.name = read_string(cur).map_err(remap)?,
            (3, WIRE_VARINT) => field.number = cur.read_varint().map_err(remap)? as i32,
            (4, WIRE_VARINT) => field.label = cur.read_varint().map_err(remap)? as i32,
            (5, WIRE_VARINT) => field.type_ = cur.read_varint().map_err(remap)? as i32,
            (6, WIRE_LEN) => field.type_name = read_string(cur).map_err(remap)?,
            (9, WIRE_VARINT) => field.oneof_index = Some(cur.read_varint().map_err(remap)? as i32),
            (17, WIRE_VARINT) => field.proto3_optional = cur.read_varint().map_err(remap)? != 0,
            _ => cur.skip_field(wt).map_err(remap)?,
        }
    }
    Ok(field)
}

fn parse_enum(cur: &mut Cursor<'_>) -> Result<EnumDescriptor> {
    let mut en = EnumDescriptor::default();
    while !cur.is_empty() {
        let (num, wt) = cur.read_tag().map_err(remap)?;
        match (num, wt) {
            (1, WIRE_LEN) => en.name = read_string(cur).map_err(remap)?,
            (2, WIRE_LEN) => {
                let mut sub = sub_cursor(cur).map_err(remap)?;
                en.values.push(parse_enum_value(&mut sub)?);
            }
            _ => cur.skip_field(wt).map_err(remap)?,
        }
    }
    Ok(en)
}

fn parse_enum_value(cur: &mut Cursor<'_>) -> Result<(String, i32)> {
    let mut name = String::new();
    let mut number = 0i32;
    while !cur.is_empty() {
        let (num, wt) = cur.read_tag().map_err(remap)?;
        match (num, wt) {
            (1, WIRE_LEN) => name = read_string(cur).map_err(remap)?,
            (2, WIRE_VARINT) => number = cur.read_varint().map_err(remap)? as i32,
            _ => cur.skip_field(wt).map_err(remap)?,
        }
    }
    Ok((name, number))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn garbage_bytes_fail_with_offset() {
        // tag for field 1, wire type 2, then a length that overruns the buffer
        let bytes = [0x0a, 0xff, 0x01];
        let err = parse_file_descriptor_set(&bytes).unwrap_err();
        match err {
            Error::DescriptorParse { .. } => {}
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn empty_set_parses() {
        let set = parse_file_descriptor_set(&[]).unwrap();
        assert!(set.files.is_empty());
    }
}
