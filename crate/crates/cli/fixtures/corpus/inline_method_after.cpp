class Text {
  int count;
public:
  void clear(){
    count = 0;
  }
};
