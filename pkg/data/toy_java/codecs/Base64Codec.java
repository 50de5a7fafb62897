package toy.codecs;

/** Base64 text codec without url-safe variants. */
public class Base64Codec extends Codec {

    private static final String TABLE =
            "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

    /**
     * Encodes the given bytes with this base 64 codec using padding.
     */
    @Override
    public String encode(byte[] data) {
        StringBuilder out = new StringBuilder();
        int padding = (3 - data.length % 3) % 3;
        int buffer = 0;
        int bits = 0;
        for (byte b : data) {
            buffer = (buffer << 8) | (b & 0xff);
            bits += 8;
            while (bits >= 6) {
                bits -= 6;
                out.append(TABLE.charAt((buffer >> bits) & 0x3f));
            }
        }
        if (bits > 0) {
            out.append(TABLE.charAt((buffer << (6 - bits)) & 0x3f));
        }
        for (int i = 0; i < padding; i++) {
            out.append('=');
        }
        return out.toString();
    }

    /**
     * Decodes the given base 64 text with this codec and skips whitespace.
     */
    @Override
    public byte[] decode(String text) {
        byte[] scratch = new byte[text.length()];
        int n = 0;
        int buffer = 0;
        int bits = 0;
        int skips = 0;
        for (int i = 0; i < text.length(); i++) {
            char c = text.charAt(i);
            if (Character.isWhitespace(c) || c == '=') {
                skips++;
                continue;
            }
            buffer = (buffer << 6) | TABLE.indexOf(c);
            bits += 6;
            if (bits >= 8) {
                bits -= 8;
                scratch[n++] = (byte) ((buffer >> bits) & 0xff);
            }
        }
        byte[] raw = new byte[n];
        System.arraycopy(scratch, 0, raw, 0, n);
        return raw;
    }

    /** Returns the display name of the base 64 codec. */
    @Override
    public String name() {
        return "base64";
    }
}
