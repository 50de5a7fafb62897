package toy.codecs;

/** Hexadecimal text codec. */
public class HexCodec extends Codec {

    private static final String LOWERCASE = "0123456789abcdef";

    /**
     * Encodes the given bytes with this hex codec as lowercase digits.
     */
    @Override
    public String encode(byte[] data) {
        StringBuilder digits = new StringBuilder(data.length * 2);
        for (byte b : data) {
            digits.append(LOWERCASE.charAt((b >> 4) & 0xf));
            digits.append(LOWERCASE.charAt(b & 0xf));
        }
        return digits.toString();
    }

    /**
     * Decodes the given hex text with this codec into raw bytes.
     */
    @Override
    public byte[] decode(String text) {
        byte[] raw = new byte[text.length() / 2];
        for (int i = 0; i < raw.length; i++) {
            int hi = LOWERCASE.indexOf(text.charAt(2 * i));
            int lo = LOWERCASE.indexOf(text.charAt(2 * i + 1));
            raw[i] = (byte) ((hi << 4) | lo);
        }
        return raw;
    }

    /** Returns the display name of the hex codec. */
    @Override
    public String name() {
        return "hex";
    }

    /** Returns the codec version number. */
    @Override
    public int version() {
        return 2;
    }
}
